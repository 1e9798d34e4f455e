"""Physical constants and numerical defaults shared across modules."""

GRAVITY = 9.81
H_EPS = 1e-6  # wet/dry threshold [m]
U_MAX = 100.0  # blow-up detector [m/s]
CFL = 0.25
DT_MAX = 1.0  # used when the whole domain is dry [s]

WALL = 0
OUTFLOW = 1
TAG_NAMES = {WALL: "WALL", OUTFLOW: "OUTFLOW"}
TAG_CODES = {"WALL": WALL, "OUTFLOW": OUTFLOW}

# unit conversions to SI
CM_PER_H = 1.0 / 360000.0
MM_PER_H = 1.0 / 3600000.0
