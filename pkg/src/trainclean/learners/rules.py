"""Sequential-covering rule learner with reduced-error rule pruning.

Classes are handled from least to most frequent; the most frequent class
is the default. Each rule is grown with FOIL gain on two thirds of the
remaining rows and pruned back (final conditions dropped) on the other
third. Optimisation passes then greedily drop rules or single conditions
whenever that lowers the training error of the whole rule list.
"""
import numpy as np

_MAX_RULES = 64


def _matches(rule, X):
    ok = np.ones(len(X), dtype=bool)
    for j, op, t in rule:
        v = X[:, j]
        with np.errstate(invalid="ignore"):
            if op == "<=":
                ok &= v <= t
            elif op == ">=":
                ok &= v >= t
            else:
                ok &= v == t
    return ok


def _foil(p1, n1, p0, n0):
    with np.errstate(divide="ignore", invalid="ignore"):
        g = p1 * (np.log2(p1 / (p1 + n1)) - np.log2(p0 / (p0 + n0)))
    return np.where(p1 > 0, g, -np.inf)


class RuleLearner:
    def __init__(self, X, y, n_classes, schema, params, rng):
        self.schema = schema
        self.min_cov = int(params["min_coverage"])
        self.pruning = params["pruning"] == "on"
        counts = np.bincount(y, minlength=n_classes)
        order = sorted(range(n_classes), key=lambda c: (counts[c], c))
        self.default = order[-1]
        self.rules = []
        remaining = np.ones(len(y), dtype=bool)
        for c in order[:-1]:
            for _ in range(_MAX_RULES):
                pos = remaining & (y == c)
                if not pos.any():
                    break
                rule = self._learn_one(X, y == c, remaining, rng)
                if rule is None:
                    break
                covered = _matches(rule, X) & remaining
                if (covered & pos).sum() < self.min_cov:
                    break
                self.rules.append((rule, c))
                remaining &= ~covered
        for _ in range(int(params["optimization_passes"])):
            if not self._optimise(X, y):
                break

    def _learn_one(self, X, is_pos, remaining, rng):
        rows = np.flatnonzero(remaining)
        if self.pruning:
            perm = rows[rng.permutation(len(rows))]
            cut = (2 * len(perm) + 2) // 3
            grow, held = np.sort(perm[:cut]), np.sort(perm[cut:])
        else:
            grow, held = rows, rows[:0]
        rule = self._grow(X[grow], is_pos[grow])
        if not rule:
            return None
        if self.pruning and len(held):
            Xh, ph = X[held], is_pos[held]
            best, best_len = -np.inf, len(rule)
            for L in range(1, len(rule) + 1):
                m = _matches(rule[:L], Xh)
                p, n = (m & ph).sum(), (m & ~ph).sum()
                val = (p - n) / (p + n) if p + n else -1.0
                if val >= best:
                    best, best_len = val, L
            rule = rule[:best_len]
            m = _matches(rule, Xh)
            p, n = (m & ph).sum(), (m & ~ph).sum()
            if p + n and p / (p + n) < 0.5:
                return None
        return rule

    def _grow(self, X, is_pos):
        rule = []
        cov = np.ones(len(X), dtype=bool)
        while True:
            p0, n0 = (cov & is_pos).sum(), (cov & ~is_pos).sum()
            if p0 == 0 or n0 == 0:
                break
            best = (0.0, None)
            for j in range(self.schema.width):
                cand = self._best_condition(X[cov, j], is_pos[cov], j, p0, n0)
                if cand is not None and cand[0] > best[0] + 1e-12:
                    best = cand
            if best[1] is None:
                break
            rule.append(best[1])
            cov &= _matches([best[1]], X)
        return rule

    def _best_condition(self, v, pos, j, p0, n0):
        known = ~np.isnan(v)
        v, pos = v[known], pos[known]
        if not len(v):
            return None
        if self.schema.nominal[j]:
            cats = np.unique(v)
            p1 = np.array([(pos & (v == c)).sum() for c in cats])
            n1 = np.array([(~pos & (v == c)).sum() for c in cats])
            conds = [(j, "==", float(c)) for c in cats]
        else:
            order = np.argsort(v, kind="stable")
            sv, sp = v[order], pos[order]
            cp = np.cumsum(sp)
            cn = np.cumsum(~sp)
            last = np.flatnonzero(np.r_[sv[1:] != sv[:-1], True])
            le_p, le_n = cp[last], cn[last]
            first = np.r_[0, last[:-1] + 1]
            ge_p = cp[-1] - np.r_[0, cp][first]
            ge_n = cn[-1] - np.r_[0, cn][first]
            thr = sv[last]
            p1 = np.r_[le_p, ge_p]
            n1 = np.r_[le_n, ge_n]
            conds = [(j, "<=", float(t)) for t in thr] + [(j, ">=", float(t)) for t in thr]
        gain = _foil(p1.astype(float), n1.astype(float), float(p0), float(n0))
        gain = np.where((p1 >= self.min_cov) & ((p1 < p0) | (n1 < n0)), gain, -np.inf)
        i = int(np.argmax(gain))
        if not np.isfinite(gain[i]) or gain[i] <= 0:
            return None
        return float(gain[i]), conds[i]

    def _errors(self, X, y, rules):
        return int((self._apply(rules, X) != y).sum())

    def _optimise(self, X, y):
        improved = False
        current = self._errors(X, y, self.rules)
        i = 0
        while i < len(self.rules):
            rule, c = self.rules[i]
            variants = [self.rules[:i] + self.rules[i + 1:]]
            if len(rule) > 1:
                variants += [self.rules[:i] + [(rule[:k] + rule[k + 1:], c)] + self.rules[i + 1:]
                             for k in range(len(rule))]
            for cand in variants:
                e = self._errors(X, y, cand)
                if e < current:
                    self.rules, current, improved = cand, e, True
                    break
            else:
                i += 1
        return improved

    def _apply(self, rules, X):
        out = np.full(len(X), self.default, dtype=np.int64)
        free = np.ones(len(X), dtype=bool)
        for rule, c in rules:
            m = _matches(rule, X) & free
            out[m] = c
            free &= ~m
        return out

    def predict(self, X):
        return self._apply(self.rules, X)
