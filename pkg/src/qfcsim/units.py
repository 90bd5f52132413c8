"""Unit handling at the configuration boundary.

Everything inside the package is SI: meters, watts, rad/m, 1/m power
attenuation, W^-1 m^-2 normalized efficiency.  Config files and CSV headers
carry explicit unit tags ("20 dB/cm", "70000 %/W/cm^2", "23 mW") which are
converted here, once, on the way in.  Loss conversion follows
alpha[1/m] = ln(10)/10 * alpha[dB/m].
"""

import math
import re

# multiplicative factors to SI, keyed by (quantity, unit tag)
_LINEAR_FACTORS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "µW": 1e-6, "nW": 1e-9},
    "voltage": {"V": 1.0, "mV": 1e-3},
    "temperature": {"K": 1.0},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12},
    # normalized conversion efficiency; "%/W/cm^2" is the paper-style tag
    "norm_efficiency": {
        "W^-1 m^-2": 1.0,
        "/W/m^2": 1.0,
        "W^-1 cm^-2": 1e4,
        "/W/cm^2": 1e4,
        "%/W/cm^2": 1e2,
    },
    "wavenumber": {"rad/m": 1.0, "rad/mm": 1e3, "rad/cm": 1e2},
    "heater_response": {"rad/m/V^2": 1.0, "rad/mm/V^2": 1e3},
    "thermal_response": {"rad/m/W": 1.0, "rad/mm/W": 1e3},
    "dispersion_factor": {"m^2/rad": 1.0, "m2/rad": 1.0, "nm/(rad/m)": 1e-9},
    "nonlinear_coefficient": {"/W/m": 1.0, "W^-1 m^-1": 1.0, "/W/cm": 1e2},
    "raman_gain": {"m/W": 1.0, "cm/W": 1e-2},
    "flux_density": {"cps/Hz": 1.0, "counts/s/Hz": 1.0},
    "rate": {"rad/s": 1.0, "/s": 1.0},
    "solid_angle": {"sr": 1.0},
    "density": {"/m^3": 1.0, "m^-3": 1.0, "/cm^3": 1e6},
    "inv_area": {"/m^2": 1.0, "m^-2": 1.0, "/cm^2": 1e4},
    "dimensionless": {"": 1.0},
}

_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*(.*?)\s*$")


class UnitError(ValueError):
    """Unknown unit tag or malformed quantity string."""


def db_per_m_to_alpha(db_per_m):
    """Power attenuation dB/m -> 1/m."""
    return math.log(10.0) / 10.0 * db_per_m


def alpha_to_db_per_m(alpha):
    return alpha * 10.0 / math.log(10.0)


def parse_quantity(value, quantity):
    """Convert a config value to SI.

    `value` is a string like "20 dB/cm" (bare numbers are accepted only for
    dimensionless quantities).  Raises UnitError for unknown tags so unit
    mistakes fail loudly at the boundary.
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if quantity == "dimensionless":
            return float(value)
        raise UnitError(
            f"value {value!r} needs an explicit unit tag for quantity {quantity!r}"
        )
    if not isinstance(value, str):
        raise UnitError(f"cannot parse {value!r} as a {quantity} quantity")
    m = _QUANTITY.match(value)
    if not m:
        raise UnitError(f"malformed quantity string {value!r}")
    number, tag = m.groups()
    try:
        x = float(number)
    except ValueError as exc:
        raise UnitError(f"malformed number in {value!r}") from exc

    if quantity == "loss":
        # dB-based tags are logarithmic, handled separately
        if tag == "dB/cm":
            return db_per_m_to_alpha(x * 100.0)
        if tag == "dB/m":
            return db_per_m_to_alpha(x)
        if tag in ("1/m", "/m", "m^-1"):
            return x
        if tag in ("1/cm", "/cm", "cm^-1"):
            return x * 100.0
        raise UnitError(f"unknown loss unit {tag!r} in {value!r}")

    factors = _LINEAR_FACTORS.get(quantity)
    if factors is None:
        raise UnitError(f"unknown quantity kind {quantity!r}")
    if tag not in factors:
        known = ", ".join(sorted(factors))
        raise UnitError(f"unknown {quantity} unit {tag!r} in {value!r} (known: {known})")
    return x * factors[tag]
