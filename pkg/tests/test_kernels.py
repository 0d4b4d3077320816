import random

import pytest
from hypothesis import given, settings, strategies as st

from ucqa import kernels
from ucqa.grounding import Grounding
from ucqa.kernels import _pykernels as py
from ucqa.oracle import PROFILES, gen_random

c = pytest.importorskip("ucqa.kernels._ckernels")


def _rules(rng, nbits, n):
    lhs, rhs = [], []
    for _ in range(n):
        l = sum(1 << b for b in rng.sample(range(nbits), rng.randint(0, min(3, nbits))))
        r = sum(1 << b for b in rng.sample(range(nbits), rng.randint(0, min(2, nbits))))
        lhs.append(l)
        rhs.append(r)
    return lhs, rhs


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 11), st.integers(0, 12), st.integers(0, 2**32))
def test_backends_agree(nbits, nrules, seed):
    rng = random.Random(seed)
    lhs, rhs = _rules(rng, nbits, nrules)
    pr, cr = py.RuleSet(lhs, rhs), c.RuleSet(lhs, rhs)
    assert pr.lhs_masks == list(cr.lhs_masks) and pr.rhs_masks == list(cr.rhs_masks)
    pm = py.consistent_masks(nbits, pr)
    assert sorted(pm) == sorted(c.consistent_masks(nbits, cr))
    base = rng.getrandbits(nbits)
    assert py.minimal_masks(base, pm) == list(c.minimal_masks(base, pm))
    single = [k for k, r in enumerate(rhs) if bin(r).count("1") == 1]
    tl, tr = [lhs[k] for k in single], [rhs[k] for k in single]
    pt, ct = py.RuleSet(tl, tr), c.RuleSet(tl, tr)
    for _ in range(10):
        m = rng.getrandbits(nbits)
        assert pr.is_consistent(m) == cr.is_consistent(m)
        assert pr.first_violated(m) == cr.first_violated(m)
        assert pt.closure(m) == ct.closure(m)
        assert tuple(py.check_repair_mask(base, m, pt, pr)) == tuple(c.check_repair_mask(base, m, ct, cr))


def test_consistent_masks_match_definition():
    rng = random.Random(7)
    for _ in range(30):
        nbits = rng.randint(1, 8)
        lhs, rhs = _rules(rng, nbits, rng.randint(0, 6))
        rs = py.RuleSet(lhs, rhs)
        expected = [m for m in range(1 << nbits)
                    if all((l & ~m) or (r & m) for l, r in zip(lhs, rhs))]
        assert sorted(py.consistent_masks(nbits, rs)) == expected


def test_dispatch_and_wide_masks():
    assert kernels.BACKEND in ("cython", "python")
    wide = kernels.pack([1 << 70], [1], nbits=71)
    assert isinstance(wide, py.RuleSet)
    assert kernels.minimal_masks(0, [1 << 70, (1 << 70) | 1]) == [1 << 70]
    assert isinstance(kernels.pack([1], [2], backend="python"), py.RuleSet)
    assert isinstance(kernels.pack([1], [2], backend="cython"), c.RuleSet)
    with pytest.raises(OverflowError):
        kernels.pack([1 << 70], [1], backend="cython")


@pytest.mark.parametrize("profile", PROFILES)
def test_backends_agree_on_groundings(profile):
    for seed in range(10):
        _, i, f = gen_random(seed, profile)
        g = Grounding(i, f)
        a = kernels.pack(g.lhs_masks, g.rhs_masks, backend="python")
        b = kernels.pack(g.lhs_masks, g.rhs_masks, backend="cython")
        ma = kernels.consistent_masks(g.nbits, a)
        assert sorted(ma) == sorted(kernels.consistent_masks(g.nbits, b))
        assert kernels.minimal_masks(g.imask, ma, backend="python") == kernels.minimal_masks(g.imask, ma)
