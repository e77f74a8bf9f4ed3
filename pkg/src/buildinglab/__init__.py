"""Desk-scale computational laboratory for boundary dynamics of
hyperbolic isometries of Euclidean buildings, modelled on SL_n(Q_p)
at finite precision."""

__version__ = "0.1.0"
