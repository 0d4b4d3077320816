"""Pure-Python bitmask kernels.

Facts are bits; a ground rule is a pair (lhs, rhs) of masks and a set ``m``
violates it when ``lhs ⊆ m`` and ``rhs ∩ m = ∅``.
"""


class RuleSet:
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs, rhs):
        self.lhs = list(lhs)
        self.rhs = list(rhs)
        if len(self.lhs) != len(self.rhs):
            raise ValueError("lhs and rhs lists differ in length")

    def __len__(self):
        return len(self.lhs)

    @property
    def lhs_masks(self):
        return list(self.lhs)

    @property
    def rhs_masks(self):
        return list(self.rhs)

    def is_consistent(self, mask):
        for l, r in zip(self.lhs, self.rhs):
            if not (l & ~mask) and not (r & mask):
                return False
        return True

    def first_violated(self, mask):
        for k, (l, r) in enumerate(zip(self.lhs, self.rhs)):
            if not (l & ~mask) and not (r & mask):
                return k
        return -1

    def closure(self, mask):
        rules = list(zip(self.lhs, self.rhs))
        changed = True
        while changed:
            changed = False
            rest = []
            for l, r in rules:
                if not (l & ~mask):
                    if r & ~mask:
                        mask |= r
                        changed = True
                else:
                    rest.append((l, r))
            rules = rest
        return mask


def consistent_masks(nbits, rules):
    """All masks over ``nbits`` bits violating no rule, by backtracking on bits."""
    by_top = [[] for _ in range(nbits)]
    always_violated = False
    for l, r in zip(rules.lhs, rules.rhs):
        span = l | r
        if not span:
            always_violated = True
            continue
        by_top[span.bit_length() - 1].append((l, r))
    if always_violated:
        return []
    out = []

    def go(k, mask):
        if k == nbits:
            out.append(mask)
            return
        for m in (mask, mask | (1 << k)):
            for l, r in by_top[k]:
                if not (l & ~m) and not (r & m):
                    break
            else:
                go(k + 1, m)

    go(0, 0)
    return out


def popcount(x):
    return bin(x).count("1")


def minimal_masks(base, masks):
    """Masks whose difference to ``base`` is ⊆-minimal among ``masks``, ascending."""
    ds = sorted({m ^ base for m in masks}, key=lambda d: (popcount(d), d))
    kept = []
    for d in ds:
        for k in kept:
            if not (k & ~d):
                break
        else:
            kept.append(d)
    return sorted(d ^ base for d in kept)


def check_repair_mask(imask, cand, tgd, allr):
    """Repair test on masks: returns (code, index, mask).

    code 0 = repair; 1 = inconsistent (index = violated rule); 2 = the
    closure of ``cand ∩ I`` differs from ``cand`` (mask = the mismatch);
    3 = some dropped fact of I can be restored (index = its bit, mask = J′).
    """
    k = allr.first_violated(cand)
    if k >= 0:
        return 1, k, 0
    c = tgd.closure(cand & imask)
    if c != cand:
        return 2, -1, c ^ cand
    outside = cand & ~imask
    dropped = imask & ~cand
    while dropped:
        low = dropped & -dropped
        j = tgd.closure(cand | low)
        if (j & ~imask) == outside and allr.is_consistent(j):
            return 3, low.bit_length() - 1, j
        dropped ^= low
    return 0, -1, 0
