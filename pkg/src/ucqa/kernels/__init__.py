"""Bitmask kernels with a compiled backend and a pure-Python fallback.

The compiled module is used when it imported and every mask fits in 64 bits.
Set ``UCQA_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels as py

c = None
if os.environ.get("UCQA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as c
    except ImportError:
        c = None

BACKEND = "cython" if c is not None else "python"


def pack(lhs, rhs, nbits=None, backend=None):
    """Pack parallel lists of rule masks for the chosen (or best) backend.

    ``nbits`` is the width of the masks that will be tested against the rules;
    above 64 only the Python backend applies.
    """
    lhs, rhs = list(lhs), list(rhs)
    wide = nbits is not None and nbits > 64
    if backend == "python" or (backend is None and (c is None or wide)):
        return py.RuleSet(lhs, rhs)
    if c is None:
        raise RuntimeError("compiled kernels are not available")
    try:
        return c.RuleSet(lhs, rhs)
    except OverflowError:
        if backend == "cython":
            raise
        return py.RuleSet(lhs, rhs)


def _mod(*rulesets):
    if c is not None and all(isinstance(r, c.RuleSet) for r in rulesets):
        return c
    return py


def consistent_masks(nbits, rules):
    m = _mod(rules)
    if m is c and nbits > 30:
        m = py
        rules = py.RuleSet(rules.lhs_masks, rules.rhs_masks)
    return m.consistent_masks(nbits, rules)


def minimal_masks(base, masks, backend=None):
    masks = list(masks)
    use_c = c is not None and backend != "python"
    if use_c and base < (1 << 64) and all(m < (1 << 64) for m in masks):
        return c.minimal_masks(base, masks)
    return py.minimal_masks(base, masks)


def check_repair_mask(imask, cand, tgd, allr):
    m = _mod(tgd, allr)
    if m is c and (imask >= 1 << 64 or cand >= 1 << 64):
        m = py
    return m.check_repair_mask(imask, cand, tgd, allr)
