"""Centralized numeric defaults. Every report echoes :data:`DEFAULTS`."""

BALL_CAP = 200_000
CND_TOL = 1e-9
ISOMETRY_TOL = 1e-12
COCYCLE_TOL = 1e-12

# Frullani quadrature: log-spaced composite Simpson on [eps, T], T = horizon / x.
FRULLANI_EPS = 1e-8
FRULLANI_HORIZON = 200.0
FRULLANI_NODES = 20_000
FRULLANI_RTOL = 1e-6

# Materialized shift blocks live on {0,1}^(torus); cap on torus bit count.
MATERIALIZE_MAX_BITS = 20
MATERIALIZE_MAX_WINDOW = 9
SCHEDULE_MAX_N = 5001
SCHEDULE_MAX_BITS = 50_000

DEFAULT_SEED = 0

DEFAULTS = {
    "ball_cap": BALL_CAP,
    "cnd_tol": CND_TOL,
    "isometry_tol": ISOMETRY_TOL,
    "cocycle_tol": COCYCLE_TOL,
    "frullani_eps": FRULLANI_EPS,
    "frullani_horizon": FRULLANI_HORIZON,
    "frullani_nodes": FRULLANI_NODES,
    "frullani_rtol": FRULLANI_RTOL,
    "materialize_max_bits": MATERIALIZE_MAX_BITS,
    "materialize_max_window": MATERIALIZE_MAX_WINDOW,
    "schedule_max_n": SCHEDULE_MAX_N,
    "schedule_max_bits": SCHEDULE_MAX_BITS,
    "seed": DEFAULT_SEED,
}
