#
# Complete matching modulo associativity, commutativity, and identity,
# at the root and anywhere within a term (with extension to argument
# segments of flattened applications).
#

from __future__ import annotations

from itertools import combinations

from .terms import ANY_SORT, App, Seg, Signature, Subst, Term, Var, explode


class Match:
    """A matching substitution plus, optionally, the positions at which
    tracked pattern variables were bound (used by subterm rewriting)."""

    __slots__ = ('subst', 'var_pos')

    def __init__(self, subst, var_pos):
        self.subst = subst
        self.var_pos = var_pos

    def __repr__(self):
        return f'Match({self.subst!r})'


def match_root(sig: Signature, pat: Term, subj: Term, track=frozenset()) -> list[Match]:
    """Complete, duplicate-free enumeration of the substitutions making the
    pattern equal to the subject modulo the declared axioms.  Variables
    directly under an operator with an identity may bind the identity."""
    out, seen = [], set()
    for b, vp in _match(sig, pat, subj, {}, {}, (), frozenset(track)):
        s = Subst(b)
        if s not in seen:
            seen.add(s)
            out.append(Match(s, vp))
    out.sort(key=lambda m: m.subst.sort_key(sig))
    return out


def matches(sig: Signature, pat: Term, subj: Term) -> bool:
    """Whether the pattern matches the subject at the root."""
    for _ in _match(sig, pat, subj, {}, {}, (), frozenset()):
        return True
    return False


def match_many(sig: Signature, pats, subjs) -> list[Match]:
    """Simultaneous root matching of a tuple of patterns against a tuple of
    subjects under one shared substitution (strategy call heads)."""
    if len(pats) != len(subjs):
        return []
    states = [({}, {})]
    for pat, subj in zip(pats, subjs):
        states = [ext for b, vp in states
                  for ext in _match(sig, pat, subj, b, vp, (), frozenset())]
        if not states:
            return []
    out, seen = [], set()
    for b, vp in states:
        s = Subst(b)
        if s not in seen:
            seen.add(s)
            out.append(Match(s, vp))
    out.sort(key=lambda m: m.subst.sort_key(sig))
    return out


def search(sig: Signature, pat: Term, subj: Term, *, frozen=None,
           track=frozenset()) -> list[tuple[tuple, Match]]:
    """All (position, match) pairs of the pattern anywhere within the
    subject, including argument segments (contiguous spans for plain assoc
    operators, sub-multisets when also commutative).

    frozen, if given, maps an operator name to its set of 1-based frozen
    argument indices; positions under frozen arguments are not visited.
    """
    track = frozenset(track)
    pat_is_collection = isinstance(pat, App) and sig.axioms(pat.op)[0]
    pat_op = pat.op if isinstance(pat, App) else None
    results = []
    seen = set()

    def emit(pos, ms):
        for m in ms:
            key = (pos, m.subst)
            if key not in seen:
                seen.add(key)
                results.append((pos, m))

    def walk(t, path, parent_op):
        if pat_is_collection and isinstance(t, App) and t.op == pat_op:
            n = len(t.children)
            _, comm, _ = sig.axioms(pat_op)
            fr = frozen(pat_op) if frozen else None
            for idxs in _segments(n, comm):
                if fr and any(i + 1 in fr for i in idxs):
                    continue
                if len(idxs) == n:
                    pos, sub = path, t
                else:
                    pos = path + (Seg(pat_op, idxs),)
                    sub = _rebuild(sig, pat_op, [t.children[i] for i in idxs], None)
                emit(pos, match_root(sig, pat, sub, track))
        elif not (pat_is_collection and parent_op == pat_op):
            # Children of applications of the pattern's own collection
            # operator are covered by the one-element segments above
            emit(path, match_root(sig, pat, t, track))
        if isinstance(t, App):
            fr = frozen(t.op) if frozen else None
            for i, c in enumerate(t.children):
                if fr and i + 1 in fr:
                    continue
                walk(c, path + (i,), t.op)

    walk(subj, (), None)
    return results


def _segments(n, comm):
    """Argument selections in deterministic order: for sequences, spans by
    ascending start then length; for multisets, subsets by size then indices."""
    if not comm:
        for start in range(n):
            for length in range(1, n - start + 1):
                yield tuple(range(start, start + length))
    else:
        for size in range(1, n + 1):
            yield from combinations(range(n), size)


def _rebuild(sig, op, elems, identity):
    if not elems:
        return identity if identity is not None else sig.axioms(op)[2]
    if len(elems) == 1:
        return elems[0]
    return sig.make_app(op, elems)


def _bind(sig, b, vp, var, value, pos, track):
    """Extend bindings with var -> value if consistent and well-sorted."""
    bound = b.get(var)
    if bound is not None:
        if bound == value:
            return b, vp
        return None
    if var.sort != ANY_SORT and not sig.leq(sig.least_sort(value), var.sort):
        return None
    b2 = {**b, var: value}
    if var.name in track:
        vp = {**vp, var.name: pos}
    return b2, vp


def _match(sig, pat, subj, b, vp, path, track):
    """Yield (bindings, var_positions) extending b so that the instantiated
    pattern equals the subject in canonical form."""
    if isinstance(pat, Var):
        ext = _bind(sig, b, vp, pat, subj, path, track)
        if ext is not None:
            yield ext
        return
    if isinstance(subj, Var):
        return
    assoc, comm, identity = sig.axioms(pat.op)
    if assoc:
        elems = explode(sig, pat.op, subj)
        if comm:
            yield from _match_multiset(sig, pat.op, pat.children, elems,
                                       b, vp, path, track, identity)
        else:
            yield from _match_sequence(sig, pat.op, pat.children, elems,
                                       b, vp, path, track, identity)
        return
    if pat.op != subj.op or len(pat.children) != len(subj.children):
        return
    if comm and len(pat.children) == 2:
        for i, j in ((0, 1), (1, 0)):
            for b1, vp1 in _match(sig, pat.children[0], subj.children[i],
                                  b, vp, path + (i,), track):
                yield from _match(sig, pat.children[1], subj.children[j],
                                  b1, vp1, path + (j,), track)
        return
    yield from _match_args(sig, pat.children, subj.children, b, vp, path, track, 0)


def _match_args(sig, pats, subs, b, vp, path, track, k):
    if k == len(pats):
        yield b, vp
        return
    for b1, vp1 in _match(sig, pats[k], subs[k], b, vp, path + (k,), track):
        yield from _match_args(sig, pats, subs, b1, vp1, path, track, k + 1)


def _min_len(p, identity):
    return 0 if (identity is not None and isinstance(p, Var)) else 1


def _match_sequence(sig, op, pats, elems, b, vp, path, track, identity):
    """Assoc (non-comm) matching: pattern children take consecutive segments."""
    n = len(elems)
    suffix_min = [0] * (len(pats) + 1)
    for i in range(len(pats) - 1, -1, -1):
        suffix_min[i] = suffix_min[i + 1] + _min_len(pats[i], identity)

    def go(pi, start, b, vp):
        if pi == len(pats):
            if start == n:
                yield b, vp
            return
        p = pats[pi]
        avail = n - start - suffix_min[pi + 1]
        if isinstance(p, Var):
            lmin = 0 if identity is not None else 1
            for length in range(lmin, avail + 1):
                value = _rebuild(sig, op, elems[start:start + length], identity)
                pos = path + (Seg(op, tuple(range(start, start + length)), start),)
                ext = _bind(sig, b, vp, p, value, pos, track)
                if ext is not None:
                    yield from go(pi + 1, start + length, *ext)
        elif avail >= 1:
            pos = path + (Seg(op, (start,)),)
            for b1, vp1 in _match(sig, p, elems[start], b, vp, pos, track):
                yield from go(pi + 1, start + 1, b1, vp1)

    yield from go(0, 0, b, vp)


def _match_multiset(sig, op, pats, elems, b, vp, path, track, identity):
    """Assoc-comm matching: pattern children take disjoint sub-multisets.
    Non-variable children are matched first; a trailing lone variable takes
    the whole remainder directly (the common collection-pattern case)."""
    order = sorted(range(len(pats)), key=lambda i: isinstance(pats[i], Var))
    n = len(elems)

    def go(k, remaining, b, vp):
        if k == len(order):
            if not remaining:
                yield b, vp
            return
        p = pats[order[k]]
        rest = [pats[order[j]] for j in range(k + 1, len(order))]
        min_rest = sum(_min_len(q, identity) for q in rest)
        if not isinstance(p, Var):
            if len(remaining) < 1 + min_rest:
                return
            tried = set()
            for i in remaining:
                e = elems[i]
                if e in tried:
                    continue
                tried.add(e)
                pos = path + (Seg(op, (i,)),)
                rem = tuple(x for x in remaining if x != i)
                for b1, vp1 in _match(sig, p, e, b, vp, pos, track):
                    yield from go(k + 1, rem, b1, vp1)
            return
        if not rest:
            # Forced: the last variable absorbs everything left
            if not remaining and identity is None:
                return
            value = _rebuild(sig, op, [elems[i] for i in remaining], identity)
            pos = path + (Seg(op, remaining),)
            ext = _bind(sig, b, vp, p, value, pos, track)
            if ext is not None:
                yield from go(k + 1, (), *ext)
            return
        lmin = 0 if identity is not None else 1
        lmax = len(remaining) - min_rest
        for size in range(lmin, lmax + 1):
            chosen_values = set()
            for combo in combinations(remaining, size):
                value = _rebuild(sig, op, [elems[i] for i in combo], identity)
                if value in chosen_values:
                    continue
                chosen_values.add(value)
                pos = path + (Seg(op, combo),)
                ext = _bind(sig, b, vp, p, value, pos, track)
                if ext is not None:
                    rem = tuple(x for x in remaining if x not in combo)
                    yield from go(k + 1, rem, *ext)

    yield from go(0, tuple(range(n)), b, vp)
