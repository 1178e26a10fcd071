import enum


class Mechanism(enum.StrEnum):
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"


class SweepParameter(enum.StrEnum):
    EPS_REL = "eps_rel"
    T = "T"
    ALPHA = "alpha"
    K = "K"
