import numpy as np
import pytest

from netconfound import SocialNetwork, read_edge_list, write_edge_list


def test_empty_network_all_exposures_zero():
    net = SocialNetwork.from_edges(3, [])
    y = np.array([1.0, 2.0, 3.0])
    assert np.all(net.exposure("out", y) == 0)
    assert np.all(net.exposure("in", y) == 0)


def test_single_directed_edge():
    net = SocialNetwork.from_edges(2, [(0, 1)])
    assert net.adjacency[0, 1] == 1
    assert net.adjacency[1, 0] == 0
    part = net.reciprocity_partition()
    assert part.mutual == frozenset()
    assert part.named_only == frozenset({(0, 1)})
    assert part.namer_only == frozenset({(1, 0)})


def test_from_edges_duplicates_collapse():
    a = SocialNetwork.from_edges(3, [(0, 1), (0, 1), (1, 2)])
    b = SocialNetwork.from_edges(3, [(0, 1), (1, 2)])
    assert np.array_equal(a.adjacency, b.adjacency)


def test_from_edges_rejects_bad_input():
    with pytest.raises(ValueError):
        SocialNetwork.from_edges(3, [(0, 3)])
    with pytest.raises(ValueError):
        SocialNetwork.from_edges(3, [(-1, 0)])
    with pytest.raises(ValueError):
        SocialNetwork.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        SocialNetwork.from_edges(0, [])


def test_adjacency_validation():
    with pytest.raises(ValueError):
        SocialNetwork(np.array([[0, 2], [0, 0]]))
    with pytest.raises(ValueError):
        SocialNetwork(np.array([[1, 0], [0, 0]]))  # self-loop
    with pytest.raises(ValueError):
        SocialNetwork(np.zeros((2, 3)))


def test_exposure_hand_cases():
    # n=2, edge (0,1), y=(5,7): out=(7,0), in=(0,5)
    net = SocialNetwork.from_edges(2, [(0, 1)])
    y = np.array([5.0, 7.0])
    assert np.array_equal(net.exposure("out", y), [7.0, 0.0])
    assert np.array_equal(net.exposure("in", y), [0.0, 5.0])

    # n=3, edges {(0,1),(0,2)}, y=(0,1,1): out-exposure[0] = 2
    net3 = SocialNetwork.from_edges(3, [(0, 1), (0, 2)])
    out = net3.exposure("out", np.array([0.0, 1.0, 1.0]))
    assert out[0] == 2.0


def test_exposure_validates_length_and_direction():
    net = SocialNetwork.from_edges(2, [(0, 1)])
    with pytest.raises(ValueError):
        net.exposure("out", np.ones(3))
    with pytest.raises(ValueError):
        net.exposure("sideways", np.ones(2))


def test_exposure_matches_bruteforce_on_random_networks():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = int(rng.integers(2, 51))
        adj = (rng.random((n, n)) < 0.15).astype(np.uint8)
        np.fill_diagonal(adj, 0)
        net = SocialNetwork(adj)
        y = rng.normal(size=n)
        out = np.array([sum(adj[i, j] * y[j] for j in range(n)) for i in range(n)])
        inc = np.array([sum(adj[j, i] * y[j] for j in range(n)) for i in range(n)])
        np.testing.assert_allclose(net.exposure("out", y), out, atol=1e-12)
        np.testing.assert_allclose(net.exposure("in", y), inc, atol=1e-12)


def test_reciprocity_partition_hand_case():
    # mutual pair {0,1}, named-only (1,2), namer-only entry for node 2
    net = SocialNetwork.from_edges(3, [(0, 1), (1, 0), (1, 2)])
    part = net.reciprocity_partition()
    assert part.mutual == frozenset({(0, 1)})
    assert part.named_only == frozenset({(1, 2)})
    assert part.namer_only == frozenset({(2, 1)})


def test_reciprocity_partition_empty_and_full():
    assert SocialNetwork.from_edges(3, []).reciprocity_partition() == \
        SocialNetwork.from_edges(3, []).reciprocity_partition()
    part = SocialNetwork.from_edges(2, [(0, 1), (1, 0)]).reciprocity_partition()
    assert part.mutual == frozenset({(0, 1)})
    assert part.named_only == frozenset()
    assert part.namer_only == frozenset()


def test_reciprocity_partition_disjoint_and_covers_edges():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(2, 30))
        adj = (rng.random((n, n)) < 0.2).astype(np.uint8)
        np.fill_diagonal(adj, 0)
        net = SocialNetwork(adj)
        part = net.reciprocity_partition()
        assert part.mutual.isdisjoint(part.named_only)
        assert part.named_only.isdisjoint(part.namer_only)
        assert part.mutual.isdisjoint(part.namer_only)
        covered = set()
        for i, j in part.mutual:
            covered |= {(i, j), (j, i)}
        covered |= set(part.named_only)
        covered |= {(j, i) for i, j in part.namer_only}
        assert covered == set(net.edges())
        # namer_only mirrors named_only exactly
        assert {(j, i) for i, j in part.namer_only} == set(part.named_only)


def test_is_symmetric():
    assert SocialNetwork.from_edges(2, [(0, 1), (1, 0)]).is_symmetric()
    assert not SocialNetwork.from_edges(2, [(0, 1)]).is_symmetric()


def test_degrees_and_neighbors():
    net = SocialNetwork.from_edges(4, [(0, 1), (0, 2), (3, 0)])
    assert net.out_degree().tolist() == [2, 0, 0, 1]
    assert net.in_degree().tolist() == [1, 1, 1, 0]
    assert net.out_neighbors(0).tolist() == [1, 2]
    assert net.out_neighbors(1).tolist() == []


def test_adjacency_is_read_only():
    net = SocialNetwork.from_edges(2, [(0, 1)])
    with pytest.raises(ValueError):
        net.adjacency[0, 1] = 0


def test_edge_list_roundtrip(tmp_path):
    net = SocialNetwork.from_edges(5, [(0, 1), (1, 0), (2, 4)])
    path = tmp_path / "edges.txt"
    write_edge_list(net, path)
    back = read_edge_list(path, n=5)
    assert np.array_equal(back.adjacency, net.adjacency)
    inferred = read_edge_list(path)
    assert inferred.n == 5


def test_edge_list_empty_roundtrip(tmp_path):
    net = SocialNetwork.from_edges(3, [])
    path = tmp_path / "empty.txt"
    write_edge_list(net, path)
    assert read_edge_list(path, n=3).n == 3
    with pytest.raises(ValueError):
        read_edge_list(path)  # no n and nothing to infer from
