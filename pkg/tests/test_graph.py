"""Tests for the DAG representation and d-separation checks."""

import numpy as np
import pytest

from cvbopt.graph import Dag, check_collapsible, d_separated, parse_graph_file

from _oracles import (
    cond_mutual_info,
    joint_distribution,
    random_cpts,
    random_dag,
    random_dsep_query,
)


@pytest.fixture
def chain():
    return Dag(("A", "B", "C"), (("A", "B"), ("B", "C")))


@pytest.fixture
def collider():
    return Dag(("A", "B", "C"), (("A", "C"), ("B", "C")))


@pytest.fixture
def mog_graph():
    # pi -> L -> Y <- eta
    return Dag(("pi", "L", "Y", "eta"), (("pi", "L"), ("L", "Y"), ("eta", "Y")))


class TestDag:
    def test_cycle_rejected(self):
        with pytest.raises(ValueError, match="cycle"):
            Dag(("A", "B"), (("A", "B"), ("B", "A")))

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(ValueError, match="not a declared node"):
            Dag(("A",), (("A", "B"),))

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            Dag(("A", "B"), (("A", "B"), ("A", "B")))

    def test_ancestors(self, chain):
        assert chain.ancestors({"C"}) == {"A", "B", "C"}
        assert chain.ancestors({"A"}) == {"A"}


class TestDSeparated:
    def test_blocked_chain(self, chain):
        assert d_separated(chain, {"A"}, {"C"}, {"B"})
        assert not d_separated(chain, {"A"}, {"C"}, set())

    def test_collider(self, collider):
        assert d_separated(collider, {"A"}, {"B"}, set())
        assert not d_separated(collider, {"A"}, {"B"}, {"C"})

    def test_collider_descendant_activates(self):
        g = Dag(
            ("A", "B", "C", "D"), (("A", "C"), ("B", "C"), ("C", "D"))
        )
        assert d_separated(g, {"A"}, {"B"}, set())
        assert not d_separated(g, {"A"}, {"B"}, {"D"})

    def test_unknown_node(self, chain):
        with pytest.raises(ValueError, match="unknown"):
            d_separated(chain, {"A"}, {"Z"}, set())

    def test_overlap_rejected(self, chain):
        with pytest.raises(ValueError, match="disjoint"):
            d_separated(chain, {"A"}, {"A"}, set())
        with pytest.raises(ValueError, match="disjoint"):
            d_separated(chain, {"A"}, {"C"}, {"A"})

    def test_symmetry(self):
        rng = np.random.default_rng(53)
        for _ in range(50):
            g = random_dag(rng)
            x, y, given = random_dsep_query(g, rng)
            assert d_separated(g, {x}, {y}, given) == d_separated(
                g, {y}, {x}, given
            )

    def test_set_query_is_pairwise(self):
        rng = np.random.default_rng(59)
        for _ in range(30):
            g = random_dag(rng, max_nodes=6)
            nodes = list(g.nodes)
            rng.shuffle(nodes)
            a, b = set(nodes[:2]), set(nodes[2:4])
            given = set(nodes[4:])
            want = all(
                d_separated(g, {u}, {v}, given) for u in a for v in b
            )
            assert d_separated(g, a, b, given) == want

    def test_cmi_oracle_equivalence(self):
        # d-separation must match exhaustive conditional mutual
        # information on random binary networks
        rng = np.random.default_rng(61)
        n_sep = n_con = 0
        for _ in range(60):
            g = random_dag(rng)
            cpts = random_cpts(g, rng)
            names, states, probs = joint_distribution(g, cpts)
            x, y, given = random_dsep_query(g, rng)
            sep = d_separated(g, {x}, {y}, given)
            cmi = cond_mutual_info(names, states, probs, x, y, given)
            if sep:
                n_sep += 1
                assert cmi < 1e-12, f"separated pair has CMI {cmi}"
            else:
                n_con += 1
                assert cmi >= 1e-12, f"connected pair has CMI {cmi}"
        # the sample must actually exercise both branches
        assert n_sep > 5 and n_con > 5

    def test_edge_addition_monotone(self):
        rng = np.random.default_rng(67)
        for _ in range(30):
            g = random_dag(rng, max_nodes=5)
            topo = list(g.nodes)
            candidates = [
                (topo[i], topo[j])
                for i in range(len(topo))
                for j in range(i + 1, len(topo))
                if (topo[i], topo[j]) not in g.edges
                and not g.ancestors({topo[i]}) & {topo[j]}
            ]
            if not candidates:
                continue
            new_edge = candidates[int(rng.integers(len(candidates)))]
            g2 = Dag(g.nodes, g.edges + (new_edge,))
            x, y, given = random_dsep_query(g, rng)
            if d_separated(g2, {x}, {y}, given):
                assert d_separated(g, {x}, {y}, given)


class TestCheckCollapsible:
    def test_mog_structure(self, mog_graph):
        rep = check_collapsible(
            mog_graph, observed={"Y"}, parameterized={"L"}, collapsed={"pi", "eta"}
        )
        assert rep.collapsible
        assert rep.failing_pairs == ()

    def test_mog_bad_split(self, mog_graph):
        rep = check_collapsible(
            mog_graph, observed={"Y"}, parameterized={"pi"}, collapsed={"L", "eta"}
        )
        assert not rep.collapsible
        assert ("L", "eta") in rep.failing_pairs

    def test_lda_structure(self):
        g = Dag(
            ("theta", "l", "w", "phi"),
            (("theta", "l"), ("l", "w"), ("phi", "w")),
        )
        rep = check_collapsible(
            g, observed={"w"}, parameterized={"l"}, collapsed={"theta", "phi"}
        )
        assert rep.collapsible

    def test_overlap_rejected(self, mog_graph):
        with pytest.raises(ValueError, match="disjoint"):
            check_collapsible(
                mog_graph, observed={"Y"}, parameterized={"Y"}, collapsed={"pi"}
            )

    def test_matches_pairwise_dsep(self):
        rng = np.random.default_rng(71)
        for _ in range(30):
            g = random_dag(rng)
            nodes = list(g.nodes)
            rng.shuffle(nodes)
            observed = set(nodes[:1])
            parameterized = set(nodes[1:2])
            collapsed = set(nodes[2:5])
            if len(collapsed) < 2:
                continue
            rep = check_collapsible(g, observed, parameterized, collapsed)
            ev = observed | parameterized
            want = [
                (u, v)
                for i, u in enumerate(sorted(collapsed))
                for v in sorted(collapsed)[i + 1 :]
                if not d_separated(g, {u}, {v}, ev)
            ]
            assert list(rep.failing_pairs) == sorted(want)
            assert rep.collapsible == (not want)


class TestGraphFile:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "mog.graph"
        p.write_text(
            "# mixture structure\n"
            "pi -> L\n"
            "L -> Y\n"
            "eta -> Y\n"
            "observe: Y\n"
            "parameterize: L\n"
            "collapse: pi, eta\n"
        )
        g, obs, par, col = parse_graph_file(p)
        assert set(g.nodes) == {"pi", "L", "Y", "eta"}
        assert obs == {"Y"} and par == {"L"} and col == {"pi", "eta"}
        assert check_collapsible(g, obs, par, col).collapsible

    def test_malformed_line_reports_lineno(self, tmp_path):
        p = tmp_path / "bad.graph"
        p.write_text("A -> B\nB => C\n")
        with pytest.raises(ValueError, match=r"bad\.graph:2"):
            parse_graph_file(p)

    def test_unknown_directive(self, tmp_path):
        p = tmp_path / "bad2.graph"
        p.write_text("A -> B\nfrobnicate: A\n")
        with pytest.raises(ValueError, match="unknown directive"):
            parse_graph_file(p)

    def test_cycle_reported_with_path(self, tmp_path):
        p = tmp_path / "cyc.graph"
        p.write_text("A -> B\nB -> A\n")
        with pytest.raises(ValueError, match="cycle"):
            parse_graph_file(p)
