"""Per-sample operation counts for the SPH, SMP and MP predistorters.

Three levels are reported:

- ``formula``: closed-form real-multiplication counts of the processing
  chains as written, every multiplication included.
- ``published``: the same with trivial multiplications (by 0, 1 and powers
  of two from the basis matrix) removed. The trivial-op census depends on
  the basis structure in ways that are not closed-form, so the removed
  amount is a calibrated per-model, per-order constant; it applies to the
  nonlinearity/error part only, never to the coefficient update.
- ``flops``: floating point operations with a complex multiply costing 6
  FLOPs and complex-by-real multiplies and complex adds costing 2.

Cases outside the calibration tables raise :class:`NotCalibratedError`
rather than silently falling back to the formula.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import ceil

KINDS = ("sph", "smp", "mp")


class NotCalibratedError(LookupError):
    """No trivial-operation calibration exists for the requested case."""


# multiplications removed from the nonlinearity/error path, keyed by order
_MUL_DISCOUNT = {
    "sph": {2: 6, 3: 7, 4: 9},
    "smp": {2: 4, 3: 7, 4: 11},
}
# (kind, P, M) exceptions to the per-order discount
_MUL_DISCOUNT_OVERRIDE = {("smp", 2, 5): 8}

# FLOPs removed from the main path census
_FLOP_DISCOUNT_SPH = {2: 5, 3: 9, 4: 11}
_FLOP_DISCOUNT_SMP = {(2, 4): 27, (3, 4): 23, (4, 4): 13, (2, 5): 37, (3, 5): 33}
# MP main path FLOPs that differ from the census
_FLOP_OVERRIDE_MP = {(11, 4): 255}


def _check(kind: str, order: int, memory: int):
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    if order < 1 or memory < 1:
        raise ValueError("order and memory depth must be positive")
    if kind == "mp" and order % 2 == 0:
        raise ValueError("memory polynomial order must be odd")


def mp_terms(order: int, memory: int) -> int:
    """``m = ceil(P/2) * M``, the number of MP coefficients."""
    return ceil(order / 2) * memory


def multiplication_breakdown(kind: str, order: int, memory: int) -> dict:
    """Formula-level real multiplications per sample, split by stage."""
    _check(kind, order, memory)
    p, mem = order, memory
    if kind == "sph":
        nonlin, filt = p * p + 4 * p + 10, 4 * mem
        update = 2 * p * mem + 4 * p + 10 * mem + 8
    elif kind == "smp":
        nonlin, filt = p * p + 3 * p + 2 * p * mem + 6 * mem + 4, 0
        update = mem * (2 * p + 8)
    else:
        m = mp_terms(p, mem)
        nonlin, filt = 3 * ceil(p / 2) - 2, 4 * m
        update = 4 * m * m + 4 * m + 2
    main = nonlin + filt
    return {"nonlinearity": nonlin, "filtering": filt, "main": main,
            "error": main, "update": update, "learning": main + update}


def complexity_formula(kind: str, order: int, memory: int):
    """``(main, learning)`` real multiplications per sample, all ops counted."""
    b = multiplication_breakdown(kind, order, memory)
    return b["main"], b["learning"]


def trivial_discount(kind: str, order: int, memory: int) -> int:
    _check(kind, order, memory)
    if kind == "mp":
        return 0
    key = (kind, order, memory)
    if key in _MUL_DISCOUNT_OVERRIDE:
        return _MUL_DISCOUNT_OVERRIDE[key]
    try:
        return _MUL_DISCOUNT[kind][order]
    except KeyError:
        raise NotCalibratedError(
            f"no trivial-operation calibration for {kind.upper()} with P={order}; "
            f"calibrated orders: {sorted(_MUL_DISCOUNT[kind])}") from None


def complexity_published(kind: str, order: int, memory: int):
    """``(main, learning)`` multiplications per sample with trivial ops removed.

    Raises:
        NotCalibratedError: for SPH/SMP orders without a calibration entry.
    """
    b = multiplication_breakdown(kind, order, memory)
    main = b["main"] - trivial_discount(kind, order, memory)
    return main, main + b["update"]


def flop_census(kind: str, order: int, memory: int) -> dict:
    """Uncalibrated FLOP counts per sample for the main path and the update.

    The spline chains share ``2P^2 + 4P + 2`` FLOPs of per-sample work
    (envelope and abscissa, powers of ``u``, the ``u^T B`` product); each
    LUT read-out adds ``4P + 2`` and each complex gain application 8.
    """
    _check(kind, order, memory)
    p, mem = order, memory
    shared = 2 * p * p + 4 * p + 2
    if kind == "sph":
        main = shared + (4 * p + 2) + 8 + 8 * mem
        update = 4 * p * mem + 24 * mem + 2
    elif kind == "smp":
        main = shared + 2 + mem * (4 * p + 10)
        update = mem * (4 * p + 10) + 2
    else:
        k, m = ceil(p / 2), mp_terms(p, mem)
        main = (3 * k - 1) + 8 * m - 2
        update = 8 * m * m + 6 * m + 2
    return {"main": main, "update": update}


def flops(kind: str, order: int, memory: int):
    """``(main, learning)`` FLOPs per sample.

    The main path value is the census minus a calibrated trivial-op amount;
    learning adds the (uncalibrated) coefficient-update census to it.

    Raises:
        NotCalibratedError: for SPH orders or SMP ``(P, M)`` pairs without a
            calibration entry.
    """
    census = flop_census(kind, order, memory)
    if kind == "sph":
        if order not in _FLOP_DISCOUNT_SPH:
            raise NotCalibratedError(f"no FLOP calibration for SPH with P={order}")
        main = census["main"] - _FLOP_DISCOUNT_SPH[order]
    elif kind == "smp":
        if (order, memory) not in _FLOP_DISCOUNT_SMP:
            raise NotCalibratedError(
                f"no FLOP calibration for SMP with P={order}, M={memory}; "
                f"calibrated: {sorted(_FLOP_DISCOUNT_SMP)}")
        main = census["main"] - _FLOP_DISCOUNT_SMP[order, memory]
    else:
        main = _FLOP_OVERRIDE_MP.get((order, memory), census["main"])
    return main, main + census["update"]


@dataclass(frozen=True)
class ComplexityReport:
    kind: str
    order: int
    memory: int
    n_points: int | None
    knot_spacing: float
    main_path_formula: int
    learning_formula: int
    main_path_published: int
    learning_published: int
    flops_main: int
    flops_learning: int
    nonlinearity: int
    filtering: int
    update: int

    def as_dict(self) -> dict:
        return asdict(self)


def report(kind: str, order: int, memory: int, n_points: int | None = None,
           knot_spacing: float = 1.0) -> ComplexityReport:
    """All complexity figures for one configuration.

    ``n_points`` and ``knot_spacing`` are carried for the record only; the
    counts do not depend on them.
    """
    b = multiplication_breakdown(kind, order, memory)
    main_pub, learn_pub = complexity_published(kind, order, memory)
    f_main, f_learn = flops(kind, order, memory)
    return ComplexityReport(kind, order, memory, n_points, knot_spacing, b["main"],
                            b["learning"], main_pub, learn_pub, f_main, f_learn,
                            b["nonlinearity"], b["filtering"], b["update"])


REPORT_COLUMNS = ("kind", "order", "memory", "main_path_formula", "learning_formula",
                  "main_path_published", "learning_published", "flops_main", "flops_learning")
