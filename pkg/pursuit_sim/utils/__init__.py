from pursuit_sim.utils.core_math import sat, sat2, sgn_fin, wrap_angle

__all__ = ["sat", "sat2", "sgn_fin", "wrap_angle"]
