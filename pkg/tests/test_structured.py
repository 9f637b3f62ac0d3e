import math
import random
from fractions import Fraction

import pytest

from flowsparse import (
    TerminalNetwork,
    certify_cuts,
    concurrent_flow,
)
from flowsparse.generators import gen_series_parallel, gen_treewidth
from flowsparse.structured import (
    SpLeaf,
    SpParallel,
    SpSeries,
    SpTree,
    StructureError,
    TreeDecomposition,
    balanced_terminal_separator,
    identity_leaf,
    mimick_small,
    sp_recognize,
    sp_sparsifier,
    sp_tree_realizes,
    translate_cut_sparsifier,
    treewidth_sparsifier,
)

from conftest import random_connected_net, random_demand


class TestTranslate:
    def net(self):
        return TerminalNetwork.make(["a", "b"], ["a", "b"], [("a", "b", 4)])

    def test_all_ones(self):
        res = translate_cut_sparsifier(self.net(), 1.0, 1.0, 1.0, False)
        assert res.claimed_quality == 1.0
        assert res.net.cap("a", "b") == 4

    def test_scaling_formula(self):
        res = translate_cut_sparsifier(self.net(), 2.0, 1.0, 2.0, False)
        assert res.net.cap("a", "b") == 8
        assert res.claimed_quality == 4.0

    def test_contraction_branch(self):
        res = translate_cut_sparsifier(self.net(), 2.0, 1.0, 1.0, True)
        assert res.net.cap("a", "b") == 4   # unchanged
        assert res.claimed_quality == 1.0

    def test_domain(self):
        with pytest.raises(StructureError):
            translate_cut_sparsifier(self.net(), 0.5, 1.0, 1.0, False)


class TestMimick:
    def test_k2_single_edge(self):
        net = TerminalNetwork.make(["s", "t", "v"], ["s", "t"],
                                   [("s", "v", 3), ("v", "t", 4)])
        res = mimick_small(net)
        assert res.net.edges == (("s", "t", Fraction(3)),)

    def test_k3_star(self):
        net = TerminalNetwork.make(
            ["v", "a", "b", "c"], ["a", "b", "c"],
            [("v", "a", 2), ("v", "b", 3), ("v", "c", 4)])
        res = mimick_small(net)
        assert len(res.net.vertices) <= 4
        assert certify_cuts(net, res.net).all_exact

    @pytest.mark.parametrize("seed", range(8))
    def test_k4_random_exact(self, seed):
        rng = random.Random(400 + seed)
        net = random_connected_net(rng, rng.randint(6, 15), 4)
        res = mimick_small(net)
        assert len(res.net.vertices) <= 5
        assert certify_cuts(net, res.net).all_exact
        for _ in range(4):
            d = random_demand(rng, net)
            lg = concurrent_flow(net, d).value
            lh = concurrent_flow(res.net, d).value
            assert lh == pytest.approx(lg, rel=1e-6)

    def test_k5_rejected(self):
        rng = random.Random(1)
        net = random_connected_net(rng, 9, 5)
        with pytest.raises(StructureError):
            mimick_small(net)


class TestSpRecognize:
    def test_single_edge(self):
        net = TerminalNetwork.make(["s", "t"], ["s", "t"], [("s", "t", 2)])
        tree = sp_recognize(net, "s", "t")
        assert isinstance(tree.root, SpLeaf)

    def test_parallel_paths(self):
        net = TerminalNetwork.make(
            ["s", "t", "m"], ["s", "t"],
            [("s", "m", 1), ("m", "t", 1), ("s", "t", 2)])
        tree = sp_recognize(net, "s", "t")
        assert isinstance(tree.root, SpParallel)
        assert sp_tree_realizes(tree, net)

    def test_k4_not_sp(self):
        vs = ["a", "b", "c", "d"]
        edges = [(u, v, 1) for i, u in enumerate(vs) for v in vs[i + 1:]]
        net = TerminalNetwork.make(vs, ["a", "b"], edges)
        with pytest.raises(StructureError, match="not series-parallel"):
            sp_recognize(net)

    @pytest.mark.parametrize("seed", range(6))
    def test_generated_instances_recognized(self, seed):
        net, tree = gen_series_parallel(rng_leaves(seed), 4, seed)
        assert sp_tree_realizes(tree, net)
        rec = sp_recognize(net, "s", "t")
        assert sp_tree_realizes(rec, net)

    def test_json_roundtrip(self):
        _, tree = gen_series_parallel(10, 3, 5)
        doc = tree.to_json_dict()
        back = SpTree.from_json_dict(doc)
        assert back == tree


def rng_leaves(seed):
    return random.Random(seed).randint(4, 24)


class TestSpSparsifier:
    def test_series_chain_collapses(self):
        verts = [f"v{i}" for i in range(11)]
        edges = [(verts[i], verts[i + 1], i + 1) for i in range(10)]
        net = TerminalNetwork.make(verts, [verts[0], verts[-1]], edges)
        res = sp_sparsifier(net)
        assert res.claimed_quality == 1.0
        assert len(res.net.vertices) == 2
        assert res.net.edges[0][2] == Fraction(1)   # bottleneck

    def test_parallel_bundle_sums(self):
        net = TerminalNetwork.make(
            ["s", "t", "a", "b", "c", "d", "e"], ["s", "t"],
            [("s", x, 1) for x in "abcde"] + [(x, "t", 1) for x in "abcde"])
        res = sp_sparsifier(net)
        assert len(res.net.vertices) <= 3

    @pytest.mark.parametrize("seed", range(5))
    def test_random_sp_exact(self, seed):
        rng = random.Random(900 + seed)
        net, tree = gen_series_parallel(rng.randint(8, 30), rng.randint(2, 5),
                                        777 + seed)
        res = sp_sparsifier(net, tree)
        k_all = len(res.net.terminals)
        assert len(res.net.vertices) <= 11 * (2 * k_all - 1) + 2
        base = TerminalNetwork.make(net.vertices, res.net.terminals, net.edges)
        assert certify_cuts(base, res.net).all_exact
        for _ in range(6):
            d = random_demand(rng, base)
            lg = concurrent_flow(base, d).value
            lh = concurrent_flow(res.net, d).value
            assert lh == pytest.approx(lg, rel=1e-6)

    def test_rejects_wrong_tree(self):
        net1, tree1 = gen_series_parallel(8, 3, 1)
        net2, _ = gen_series_parallel(8, 3, 2)
        with pytest.raises(StructureError):
            sp_sparsifier(net2, tree1)

    @pytest.mark.parametrize("seed", range(6))
    def test_output_stays_series_parallel(self, seed):
        # not guaranteed by the generic mimicking fit, but holds on these
        # seeded instances; pinned as a regression
        net, tree = gen_series_parallel(18, 5, seed)
        res = sp_sparsifier(net, tree)
        sp_recognize(res.net)


class TestTreewidth:
    def test_decomposition_validation(self):
        net, tdec = gen_treewidth(4, 14, 2, seed=3)
        tdec.validate_for(net)
        broken = TreeDecomposition(bags=tdec.bags[:1], edges=())
        with pytest.raises(StructureError):
            broken.validate_for(net)

    def test_separator_balance(self):
        net, tdec = gen_treewidth(9, 24, 2, seed=4)
        X = balanced_terminal_separator(net, tdec)
        assert len(X) <= tdec.width + 1
        outside = set(net.terminals) - X
        from flowsparse.structured import _components_minus
        for comp in _components_minus(net, X):
            assert len(comp & set(net.terminals)) <= (2 / 3) * len(outside) + 1e-9

    def test_base_case_uses_leaf_builder(self):
        net, tdec = gen_treewidth(4, 12, 2, seed=5)
        res = treewidth_sparsifier(net, tdec, "identity")
        assert dict(res.params)["depth"] == 0
        assert res.net == identity_leaf(net).net

    def test_recursion_exact_with_identity_leaves(self):
        rng = random.Random(6)
        net, tdec = gen_treewidth(10, 30, 1, seed=6)
        res = treewidth_sparsifier(net, tdec, "identity", leaf_threshold=8)
        assert dict(res.params)["depth"] >= 1
        assert res.claimed_quality == 1.0
        for _ in range(5):
            d = random_demand(rng, net)
            lg = concurrent_flow(net, d).value
            lh = concurrent_flow(res.net, d).value
            assert lh == pytest.approx(lg, rel=1e-6)

    def test_depth_bound(self):
        net, tdec = gen_treewidth(14, 40, 1, seed=7)
        res = treewidth_sparsifier(net, tdec, "identity")
        depth = dict(res.params)["depth"]
        assert depth <= math.log(net.k) / math.log(6 / 5)

    def test_quality_bookkeeping_max(self):
        net, tdec = gen_treewidth(10, 30, 1, seed=8)

        def q2_leaf(n):
            from flowsparse.results import SparsifierResult
            return SparsifierResult.of(n, "q2", 2.0)

        res = treewidth_sparsifier(net, tdec, q2_leaf, leaf_threshold=8)
        assert res.claimed_quality == 2.0

    def test_mimick_leaf_builder(self):
        net, tdec = gen_treewidth(4, 12, 1, seed=9)
        res = treewidth_sparsifier(net, tdec, "mimick")
        assert certify_cuts(net, res.net).all_exact
