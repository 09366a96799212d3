"""Independent reference implementations used to cross-check the library.

These work directly on raw term graphs and never call the canonicalizer.
"""

from infrewrite.terms import Fun, Var


def same_label(a, b):
    if isinstance(a, Var) or isinstance(b, Var):
        return a == b
    return a.symbol == b.symbol and len(a.children) == len(b.children)


def graph_bisimilar(ga, ra, gb, rb):
    """Naive pair exploration: the pairs reachable from the roots must all agree."""
    seen = set()
    todo = [(ra, rb)]
    while todo:
        x, y = todo.pop()
        if (x, y) in seen:
            continue
        seen.add((x, y))
        lx, ly = ga[x], gb[y]
        if not same_label(lx, ly):
            return False
        if isinstance(lx, Fun):
            todo.extend(zip(lx.children, ly.children))
    return True


def graph_truncated(ga, ra, gb, rb, d):
    """Unfold both graphs to depth ``d`` and compare level by level."""
    if d == 0:
        return True
    lx, ly = ga[ra], gb[rb]
    if not same_label(lx, ly):
        return False
    if isinstance(lx, Var):
        return True
    return all(graph_truncated(ga, x, gb, y, d - 1) for x, y in zip(lx.children, ly.children))


def unfold(nodes, root, d):
    """Nested tuples describing the first ``d`` levels of the tree."""
    if d == 0:
        return "?"
    label = nodes[root]
    if isinstance(label, Var):
        return ("var", label.name)
    return (label.symbol,) + tuple(unfold(nodes, c, d - 1) for c in label.children)


def term_bisimilar(s, t):
    return graph_bisimilar(s.nodes, 0, t.nodes, 0)


def marked_cycle_brute(cert):
    """Is some marked edge on a cycle?  Checked by enumerating simple paths."""
    from infrewrite.certificate import reference_edges

    edges = reference_edges(cert)
    succ = {}
    for a, b, _ in edges:
        succ.setdefault(a, set()).add(b)

    def paths_from(v, target, visited):
        if v == target:
            return True
        for w in succ.get(v, ()):
            if w not in visited and paths_from(w, target, visited | {w}):
                return True
        return False

    return any(m and paths_from(b, a, {b}) for a, b, m in edges)


def max_marked_on_paths(cert):
    """Largest number of marked edges on any path, by exhaustive search.

    Only meaningful when no marked edge is on a cycle; unmarked cycles are
    walked at most once per node.
    """
    from infrewrite.certificate import reference_edges

    out = {}
    for a, b, m in reference_edges(cert):
        out.setdefault(a, []).append((b, m))
    best = 0

    def walk(v, count, visited):
        nonlocal best
        best = max(best, count)
        for w, m in out.get(v, ()):
            if w not in visited:
                walk(w, count + int(m), visited | {w})
            else:
                best = max(best, count + int(m))

    for start in cert.nodes:
        walk(start, 0, {start})
    return best


# -- naive relation algebra on Python sets of index pairs ---------------------


def naive_root_steps(terms, trs):
    from infrewrite.trs import root_step

    index = {t: i for i, t in enumerate(terms)}
    out = set()
    for i, u in enumerate(terms):
        for r in range(len(trs.rules)):
            v = root_step(u, trs, r)
            if v is not None and v in index:
                out.add((i, index[v]))
    return out


def naive_lift(terms, rel):
    index = {t: i for i, t in enumerate(terms)}
    out = {(i, i) for i in range(len(terms))}
    for i, u in enumerate(terms):
        for j, v in enumerate(terms):
            if u.is_var or v.is_var or u.head != v.head or u.arity != v.arity or u.arity == 0:
                continue
            if all((index[a], index[b]) in rel for a, b in zip(u.args, v.args)):
                out.add((i, j))
    return out


def naive_compose(r, s):
    return {(a, c) for a, b in r for b2, c in s if b == b2}


def naive_rtc(n, r):
    out = {(i, i) for i in range(n)} | set(r)
    while True:
        more = out | naive_compose(out, out)
        if more == out:
            return out
        out = more


def naive_gfp(terms, base):
    n = len(terms)
    y = {(i, j) for i in range(n) for j in range(n)}
    while True:
        nxt = naive_rtc(n, base | naive_lift(terms, y))
        if nxt == y:
            return y
        y = nxt


def naive_inner(terms, steps, x):
    n = len(terms)
    prefix = naive_rtc(n, steps | naive_lift(terms, x))
    y = {(i, j) for i in range(n) for j in range(n)}
    while True:
        nxt = naive_compose(prefix, naive_lift(terms, y))
        if nxt == y:
            return y
        y = nxt


def naive_lfp_ired(terms, trs):
    steps = naive_root_steps(terms, trs)
    x = set()
    while True:
        nxt = naive_inner(terms, steps, x)
        if nxt == x:
            return x
        x = nxt
