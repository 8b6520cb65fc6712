"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``.  All numeric checks are
exact rational comparisons; the runtime bounds of the criteria are asserted.
"""

import json
import random
import time
from fractions import Fraction

import pytest

from fixwit.bisim import BisimInstance, boolean_closure, modal_depth
from fixwit.fixpoint import check_compatibility, check_galois_laws, codegree, degree
from fixwit.game import (
    DUAL,
    PRIMAL,
    ExistsMove,
    ExistsTurn,
    Strategy,
    exhaustive_forall_candidates,
    synthesize_dual_strategy,
    synthesize_primal_strategy,
    validate_move,
)
from fixwit.lattice import DistJoin, RelJoin, RelMeet, SetJoin, ValJoin, ValMeet
from fixwit.metric import LabelInd, MetricInstance, Next
from fixwit.termination import (
    TerminationInstance,
    enumerate_trees,
    pt,
    term_witness,
    termination_oracle,
    tree_height,
)
from fixwit.transport import transport
from fixwit.witness import (
    WitnessClaim,
    aux_d,
    aux_p,
    dual_witness_from_strategy,
    make_witness,
    primal_witness_from_strategy,
    verify_witness,
    z_pick,
)
from helpers import (
    bisimilar_pairs,
    dual_search_winners,
    primal_search_winners,
    random_distribution,
    random_lmc,
    random_mc,
    random_tree,
    random_ts,
    transport_min_by_enumeration,
)

F = Fraction
SEED = 20240811


def _report(name: str, started: float, budget: float | None, extra: str = "") -> None:
    elapsed = time.monotonic() - started
    line = f"PASS {name}: {elapsed:.1f}s"
    if budget is not None:
        assert elapsed < budget, f"{name} exceeded its {budget}s budget ({elapsed:.1f}s)"
        line += f" (< {budget:.0f}s)"
    if extra:
        line += f" [{extra}]"
    print(line)


def _suite_instances():
    rng = random.Random(SEED)
    return [random_ts(rng, max_n=8, max_out=3) for _ in range(200)]


def test_bisimilarity_soundness_completeness():
    started = time.monotonic()
    instances = _suite_instances()
    witnesses = 0
    for ts in instances:
        inst = BisimInstance(ts)
        oracle = bisimilar_pairs(ts)
        engine = frozenset(inst.behaviour.pairs(inst.bisimilarity()))
        assert engine == oracle

        non_bisim = [
            (x1, x2) for x1 in range(ts.n) for x2 in range(ts.n) if (x1, x2) not in oracle
        ]
        moves: dict = {}
        dual_moves: dict = {}
        for x1, x2 in non_bisim:
            stack = [RelJoin(x1, x2)]
            while stack:
                cur = stack.pop()
                if cur in moves:
                    continue
                moves[cur] = inst.primal_strategy(cur)
                stack.extend(moves[cur])
            dstack = [RelMeet(x1, x2)]
            while dstack:
                cur = dstack.pop()
                if cur in dual_moves:
                    continue
                dual_moves[cur] = inst.dual_strategy(cur)
                dstack.extend(dual_moves[cur])
        primal_strategy = Strategy(PRIMAL, moves)
        dual_strategy = Strategy(DUAL, dual_moves)
        for x1, x2 in non_bisim:
            b = RelJoin(x1, x2)
            k = degree(inst.problem, b).value
            w = primal_witness_from_strategy(inst, b, primal_strategy)
            assert verify_witness(inst, WitnessClaim(PRIMAL, b), w).accepted
            assert modal_depth(w.payload) <= k
            bd = RelMeet(x1, x2)
            wd = dual_witness_from_strategy(inst, bd, dual_strategy)
            assert verify_witness(inst, WitnessClaim(DUAL, bd), wd).accepted
            assert modal_depth(wd.payload) <= codegree(inst.problem, bd).value
            witnesses += 2

        # bisimilar pairs: no distinguishing predicate up to modal depth 4, and
        # the verifier rejects every witness generated for the other pairs
        if ts.n <= 4:
            preds: set = set()
            for _ in range(4):
                closed = boolean_closure(ts.n, preds)
                preds = {
                    frozenset(x for x in range(ts.n) if any(y in s for y in ts.succ(x)))
                    for s in closed
                }
            produced = [
                primal_witness_from_strategy(inst, RelJoin(x1, x2), primal_strategy)
                for x1, x2 in non_bisim
            ]
            for x1, x2 in oracle:
                assert all((x1 in p) == (x2 in p) for p in preds)
                for w in produced:
                    assert not verify_witness(
                        inst, WitnessClaim(PRIMAL, RelJoin(x1, x2)), w
                    ).accepted
    _report("bisimilarity soundness/completeness", started, 30.0, f"{witnesses} witnesses")


def test_cmd_witness_cli_surface(tmp_path, capsys):
    """The CLI produces the same certificates for a sample of the suite."""
    from fixwit.cli import main

    started = time.monotonic()
    rng = random.Random(SEED + 1)
    checked = 0
    for _ in range(5):
        ts = random_ts(rng, max_n=5)
        pairs = [
            (x1, x2)
            for x1 in range(ts.n)
            for x2 in range(ts.n)
            if (x1, x2) not in bisimilar_pairs(ts)
        ]
        if not pairs:
            continue
        model_path = tmp_path / f"ts{checked}.json"
        model_path.write_text(
            json.dumps(
                {
                    "states": ts.n,
                    "edges": [[x, y] for x in range(ts.n) for y in ts.succ(x)],
                }
            )
        )
        x1, x2 = pairs[0]
        for mode in (PRIMAL, DUAL):
            cert = tmp_path / f"cert{checked}-{mode}.json"
            code = main(
                ["witness", str(model_path), f"{x1},{x2}", "--mode", mode, "--out", str(cert)]
            )
            assert code == 0
            assert main(["check", str(model_path), str(cert)]) == 0
            checked += 1
    capsys.readouterr()
    assert checked >= 2
    _report("cmd_witness/cmd_check CLI surface", started, None, f"{checked} certificates")


def test_game_determinacy_desk_scale():
    started = time.monotonic()
    instances = [ts for ts in _suite_instances() if ts.n <= 4]
    assert instances
    for ts in instances:
        inst = BisimInstance(ts)
        non_bisim = {
            (x1, x2)
            for x1 in range(ts.n)
            for x2 in range(ts.n)
            if (x1, x2) not in bisimilar_pairs(ts)
        }
        full = ts.n <= 3
        assert primal_search_winners(inst, full_enumeration=full) == non_bisim
        assert dual_search_winners(inst, full_enumeration=full) == non_bisim
    _report("game determinacy", started, 60.0, f"{len(instances)} instances")


def _exists_wins_all_replies(inst, witness, b, budget: int) -> None:
    """The witness-derived exists strategy beats every forall reply within
    the claimed number of rounds (exhaustive game tree over the dominant
    replies)."""
    subs = [make_witness(inst, p) for p in inst.subterms(witness.payload)]
    move = ExistsMove(value=inst.alpha_set([s.payload for s in subs]))
    verdict = validate_move(inst, PRIMAL, ExistsTurn(b, 0), move)
    assert verdict.ok, f"witness move invalid at {b}: {verdict.reason}"
    replies = exhaustive_forall_candidates(inst, move.materialize(inst))
    if not replies:
        return
    assert budget > 0, f"witness did not win within its claimed degree at {b}"
    for reply in replies:
        nxt = aux_p(inst, reply, subs, apply_logic_step=False)
        assert nxt.claimed_degree < witness.claimed_degree
        _exists_wins_all_replies(inst, nxt, reply, budget - 1)


def _forall_defeats_sampled_exists(inst, witness, bd, budget: int, rng) -> None:
    """The witness-derived forall responder replies to every sampled valid
    exists move and wins within the claimed number of rounds."""
    if budget <= 0:
        pytest.fail(f"dual witness did not win within its claimed degree at {bd}")
    lat = inst.behaviour
    pos = ExistsTurn(bd, 0)
    candidates = list(inst.iterates()) + [lat.sample(rng) for _ in range(10)]
    any_valid = False
    for value in candidates:
        move = ExistsMove(value=value)
        if not validate_move(inst, DUAL, pos, move).ok:
            continue
        any_valid = True
        subs = [make_witness(inst, p) for p in inst.subterms(witness.payload)]
        e = inst.alpha_set([s.payload for s in subs])
        reply = z_pick(lat, e, value)
        assert lat.way_above(value, lat.embed(reply))
        nxt = aux_d(inst, reply, subs, apply_logic_step=False)
        assert nxt.claimed_degree < witness.claimed_degree
        _forall_defeats_sampled_exists(inst, nxt, reply, budget - 1, rng)
    # when no exists move is valid the forall player has already won


def test_round_trip_transformations():
    started = time.monotonic()
    rng = random.Random(SEED + 2)
    checked = 0
    for ts in [ts for ts in _suite_instances() if ts.n <= 4][:40]:
        inst = BisimInstance(ts)
        for x1 in range(ts.n):
            for x2 in range(ts.n):
                if (x1, x2) in bisimilar_pairs(ts):
                    continue
                b = RelJoin(x1, x2)
                strategy = synthesize_primal_strategy(inst, b)
                w = primal_witness_from_strategy(inst, b, strategy)
                assert w.claimed_degree <= degree(inst.problem, b).value
                _exists_wins_all_replies(inst, w, b, w.claimed_degree)
                bd = RelMeet(x1, x2)
                wd = dual_witness_from_strategy(inst, bd, synthesize_dual_strategy(inst, bd))
                assert wd.claimed_degree <= codegree(inst.problem, bd).value
                _forall_defeats_sampled_exists(inst, wd, bd, wd.claimed_degree, rng)
                checked += 1
    # numeric instances: geometric chain and the 4-state labelled chain
    from fixwit.metric import LabelledMarkovChain
    from fixwit.termination import MarkovChain

    mc = MarkovChain(2, frozenset({1}), (((1, F(1, 2)), (0, F(1, 2))), None))
    ti = TerminationInstance(mc)
    for c in [F(3, 10), F(3, 5), F(7, 10)]:
        b = ValJoin(0, c)
        w = primal_witness_from_strategy(ti, b, synthesize_primal_strategy(ti, b))
        assert w.claimed_degree <= degree(ti.problem, b).value
        _exists_wins_all_replies(ti, w, b, w.claimed_degree)
        bd = ValMeet(0, c)
        wd = dual_witness_from_strategy(ti, bd, synthesize_dual_strategy(ti, bd))
        assert wd.claimed_degree <= codegree(ti.problem, bd).value
        _forall_defeats_sampled_exists(ti, wd, bd, wd.claimed_degree, rng)
        checked += 1
    lmc = LabelledMarkovChain(
        4,
        ("a", "b", "c", "c"),
        (
            ((0, F(1)),),
            ((1, F(1)),),
            ((0, F(1, 2)), (1, F(1, 2))),
            ((0, F(1, 3)), (1, F(2, 3))),
        ),
    )
    mi = MetricInstance(lmc)
    for pair, c in [((2, 3), F(1, 8)), ((2, 3), F(1, 100)), ((0, 1), F(1, 2))]:
        b = DistJoin(pair[0], pair[1], c)
        w = primal_witness_from_strategy(mi, b, synthesize_primal_strategy(mi, b))
        assert w.claimed_degree <= degree(mi.problem, b).value
        _exists_wins_all_replies(mi, w, b, w.claimed_degree)
        from fixwit.lattice import DistMeet

        bd = DistMeet(pair[0], pair[1], c)
        wd = dual_witness_from_strategy(mi, bd, synthesize_dual_strategy(mi, bd))
        assert wd.claimed_degree <= codegree(mi.problem, bd).value
        _forall_defeats_sampled_exists(mi, wd, bd, wd.claimed_degree, rng)
        checked += 1
    _report("round-trip transformations", started, None, f"{checked} positions")


def test_metric_exactness():
    started = time.monotonic()
    lmc = __import__("fixwit.metric", fromlist=["LabelledMarkovChain"]).LabelledMarkovChain(
        4,
        ("a", "b", "c", "c"),
        (
            ((0, F(1)),),
            ((1, F(1)),),
            ((0, F(1, 2)), (1, F(1, 2))),
            ((0, F(1, 3)), (1, F(2, 3))),
        ),
    )
    inst = MetricInstance(lmc)
    assert inst.iterates(2)[2][2][3] == F(1, 6)
    w = make_witness(inst, Next(LabelInd("a")))
    for c in [F(1, 8), F(1, 100), F(33, 200), F(165, 1000), F(1, 7)]:
        assert c < F(1, 6)
        verdict = verify_witness(inst, WitnessClaim(PRIMAL, DistJoin(2, 3, c)), w)
        assert verdict.accepted, c
    rejected = verify_witness(inst, WitnessClaim(PRIMAL, DistJoin(2, 3, F(1, 6))), w)
    assert not rejected.accepted

    rng = random.Random(SEED + 3)
    for _ in range(100):
        m = rng.randint(1, 5)
        n = rng.randint(1, 5)
        supply = [w_ for _, w_ in random_distribution(rng, list(range(m)), max_support=m)]
        demand = [w_ for _, w_ in random_distribution(rng, list(range(n)), max_support=n)]
        cost = [[F(rng.randint(0, 6), 6) for _ in demand] for _ in supply]
        res = transport(cost, supply, demand)
        oracle = transport_min_by_enumeration(
            tuple(tuple(row) for row in cost), tuple(supply), tuple(demand)
        )
        assert res.value == oracle
    _report("metric exactness", started, 30.0)


def test_termination_witnesses():
    started = time.monotonic()
    from fixwit.termination import MarkovChain

    mc = MarkovChain(2, frozenset({1}), (((1, F(1, 2)), (0, F(1, 2))), None))
    for k in range(1, 7):
        c = 1 - F(1, 2**k) - F(1, 2 ** (k + 3))
        w = term_witness(mc, 0, c)
        assert tree_height(w) == k + 1
        assert pt(mc, w) == 1 - F(1, 2**k)
        assert pt(mc, w) > c

    rng = random.Random(SEED + 4)
    checked = 0
    while checked < 500:
        chain = random_mc(rng, max_n=6)
        exact = termination_oracle(chain)
        for _ in range(10):
            tree = random_tree(rng, chain, max_height=5)
            if tree is None:
                continue
            assert pt(chain, tree) <= exact[tree.state]
            checked += 1
    _report("termination witnesses", started, 15.0, f"{checked} trees")


def test_law_suites():
    started = time.monotonic()
    rng = random.Random(SEED + 5)

    # --- bisimilarity: 100+ samples
    from fixwit.bisim import Diamond, HmlTrue, Not

    checked = 0
    for _ in range(12):
        ts = random_ts(rng, max_n=5)
        inst = BisimInstance(ts)
        base = Diamond(HmlTrue())
        formulas = [base, Diamond(base), Diamond(Not(base)), Diamond(Diamond(base))]
        samples = [frozenset(rng.sample(formulas, rng.randint(0, 3))) for _ in range(10)]
        behaviours = [inst.behaviour.sample(rng) for _ in range(10)]
        rep = check_galois_laws(inst, samples, behaviours)
        assert rep.ok
        rep2 = check_compatibility(inst, samples)
        assert rep2.ok
        checked += rep.checked + rep2.checked
    assert checked >= 100

    # --- metric: 100+ samples
    checked = 0
    for _ in range(15):
        lmc = random_lmc(rng, max_n=4)
        inst = MetricInstance(lmc, max_iter=8)
        formulas = [LabelInd("a"), LabelInd("b"), Next(LabelInd("a")), Next(LabelInd("b"))]
        samples = [frozenset(rng.sample(formulas, rng.randint(0, 3))) for _ in range(4)]
        behaviours = [inst.behaviour.sample(rng) for _ in range(4)]
        rep = check_galois_laws(inst, samples, behaviours)
        assert rep.ok
        rep2 = check_compatibility(inst, samples)
        assert rep2.ok
        checked += rep.checked + rep2.checked
    assert checked >= 100

    # --- termination: 100+ samples
    checked = 0
    for _ in range(15):
        mc = random_mc(rng, max_n=4)
        inst = TerminationInstance(mc, max_iter=16)
        trees = enumerate_trees(mc, max_height=3, limit=60)
        samples = [
            frozenset(rng.sample(trees, min(len(trees), rng.randint(0, 3))))
            for _ in range(4)
        ]
        behaviours = [inst.behaviour.sample(rng) for _ in range(4)]
        rep = check_galois_laws(inst, samples, behaviours)
        assert rep.ok
        rep2 = check_compatibility(inst, samples)
        assert rep2.ok
        checked += rep.checked + rep2.checked
    assert checked >= 100

    # --- degree lemmas on >= 1000 sampled element pairs
    pairs_checked = 0
    for _ in range(30):
        mc = random_mc(rng, max_n=5)
        inst = TerminationInstance(mc, max_iter=24)
        chain = inst.iterates()
        lat = inst.behaviour
        for _ in range(32):
            x = rng.randrange(mc.n)
            c1 = F(rng.randint(1, 12), 12)
            c2 = F(rng.randint(1, 12), 12)
            lo, hi = sorted([c1, c2])
            d_lo, d_hi = degree(inst.problem, ValJoin(x, lo)), degree(inst.problem, ValJoin(x, hi))
            if d_hi.known:
                assert d_lo.known and d_lo.value <= d_hi.value
            if lo < 1 and hi < 1:
                c_lo = codegree(inst.problem, ValMeet(x, lo))
                c_hi = codegree(inst.problem, ValMeet(x, hi))
                if c_hi.known and c_lo.known:
                    assert c_lo.value <= c_hi.value
            # successor bound: b' << f(a) for sampled a
            a = lat.sample(rng)
            deg_a = next((k for k, it in enumerate(chain) if lat.way_below(a, it)), None)
            if deg_a is not None:
                stepped = inst.behaviour_step(a)
                if stepped[x] > 0:
                    d = degree(inst.problem, ValJoin(x, stepped[x] * F(5, 6)))
                    assert d.known and d.value <= deg_a + 1
            pairs_checked += 1
        # join-max on set-lattice samples (tree sets)
        trees = enumerate_trees(mc, max_height=3, limit=40)
        if len(trees) >= 2:
            from fixwit.fixpoint import FixpointProblem
            from fixwit.lattice import SetLattice

            # logic step: one-step tree extensions plus terminal leaves
            from fixwit.termination import Leaf, Node, tree_root

            def step(ts_set: frozenset) -> frozenset:
                out = set(Leaf(t) for t in mc.terminal)
                by_root: dict = {}
                for t in ts_set:
                    by_root.setdefault(tree_root(t), []).append(t)
                for x in range(mc.n):
                    if x in mc.terminal:
                        continue
                    roots = [y for y in mc.succ(x) if y in by_root]
                    for y in roots:
                        for t in by_root[y]:
                            out.add(Node(x, (t,)))
                return frozenset(out)

            problem = FixpointProblem(SetLattice(), step, max_iter=5)
            for _ in range(15):
                t1, t2 = rng.sample(trees, 2)
                d1 = degree(problem, SetJoin(t1))
                d2 = degree(problem, SetJoin(t2))
                if d1.known and d2.known:
                    joined = frozenset({t1, t2})
                    chain2 = problem.iterates()
                    dj = next(
                        (k for k, it in enumerate(chain2) if problem.lattice.way_below(joined, it)),
                        None,
                    )
                    assert dj == max(d1.value, d2.value)
                pairs_checked += 1
    assert pairs_checked >= 1000
    _report("law suites", started, None, f"{pairs_checked} lemma checks")
