import sys

from pursuit_sim.main import main

sys.exit(main())
