"""Instances, seeded paths, and generators."""

import json

import numpy as np
import pytest

from nrmlab import (
    ArrivalPath,
    InstanceError,
    ScaledFamily,
    WindowError,
    arrival_counts,
    derive_seed,
    gen_multi_resource,
    gen_single_resource,
    instance_from_json,
    instance_to_json,
    make_instance,
    sample_path,
)


def test_derive_seed_is_deterministic_and_64_bit():
    a = derive_seed(2024, 17)
    assert a == derive_seed(2024, 17)
    assert 0 <= a < 2**64


def test_derive_seed_separates_indices_and_bases():
    seeds = {derive_seed(9, i) for i in range(10_000)}
    assert len(seeds) == 10_000
    assert derive_seed(1, 0) != derive_seed(2, 0)


def test_make_instance_normalizes_row_vector_A():
    inst = make_instance([0.5, 0.5], [2.0, 1.0], [1.0, 1.0], [8.0], 10)
    assert inst.A.shape == (1, 2)
    assert inst.n == 2 and inst.m == 1
    assert inst.a_bar == 1.0
    assert inst.row_max().tolist() == [1.0]


def test_instance_arrays_are_read_only():
    inst = gen_single_resource(100, 0.8, 2.0, 1.0)
    with pytest.raises(ValueError):
        inst.lam[0] = 0.3


@pytest.mark.parametrize(
    "kwargs, code",
    [
        (dict(lam=[], r=[], A=np.zeros((1, 0)), C=[1.0], T=5), "empty-dimension"),
        (dict(lam=[0.5, 0.5], r=[1.0, 1.0], A=[[1.0, 1.0]], C=[1.0], T=0), "empty-dimension"),
        (dict(lam=[0.6, 0.6], r=[1.0, 1.0], A=[[1.0, 1.0]], C=[1.0], T=5), "probabilities-do-not-sum"),
        (dict(lam=[1.0, 0.0], r=[1.0, 1.0], A=[[1.0, 1.0]], C=[1.0], T=5), "negative-entry"),
        (dict(lam=[0.5, 0.5], r=[1.0, 1.0], A=[[1.0, 1.0]], C=[0.0], T=5), "nonpositive-capacity"),
        (dict(lam=[0.5, 0.5], r=[1.0, 1.0], A=[[-1.0, 1.0]], C=[1.0], T=5), "negative-entry"),
        (dict(lam=[0.5, 0.5], r=[-1.0, 1.0], A=[[1.0, 1.0]], C=[1.0], T=5), "negative-entry"),
    ],
)
def test_validation_rejects_bad_instances(kwargs, code):
    with pytest.raises(InstanceError) as exc:
        make_instance(**kwargs)
    assert exc.value.code == code


def test_zero_probability_with_valid_sum_is_negative_entry():
    with pytest.raises(InstanceError) as exc:
        make_instance([0.5, 0.5, 0.0], [1.0, 1.0, 1.0], [[1.0, 1.0, 1.0]],
                      [1.0], 5)
    assert exc.value.code == "negative-entry"


def test_sample_path_reproducible_and_type_valued():
    inst = gen_single_resource(500, 0.8, 2.0, 1.0)
    p1 = sample_path(inst, 42)
    p2 = sample_path(inst, 42)
    p3 = sample_path(inst, 43)
    assert np.array_equal(p1.types, p2.types)
    assert not np.array_equal(p1.types, p3.types)
    assert p1.T == 500
    assert p1.types.min() >= 0 and p1.types.max() < inst.n


def test_sample_path_frequencies_match_lambda():
    inst = make_instance([0.2, 0.3, 0.5], [1.0, 1.0, 1.0],
                         [[1.0, 1.0, 1.0]], [10.0], 1_000_000)
    path = sample_path(inst, 7)
    freq = np.bincount(path.types, minlength=3) / inst.T
    # 4-sigma band for a million draws: sigma <= 0.0005
    assert np.all(np.abs(freq - inst.lam) < 0.002)


def test_arrival_counts_windows_and_errors():
    path = ArrivalPath(types=np.array([0, 1, 1, 0, 2]), seed=0)
    assert arrival_counts(path, 1, 5, n=3).tolist() == [2, 2, 1]
    assert arrival_counts(path, 2, 3, n=3).tolist() == [0, 2, 0]
    assert arrival_counts(path, 5, 5, n=3).tolist() == [0, 0, 1]
    assert arrival_counts(path, 1, 5).tolist() == [2, 2, 1]
    for t1, t2 in ((0, 3), (3, 2), (1, 6)):
        with pytest.raises(WindowError) as exc:
            arrival_counts(path, t1, t2, n=3)
        assert exc.value.code == "invalid-window"


def test_counts_sum_to_window_length():
    inst = gen_single_resource(200, 0.8, 2.0, 1.0)
    path = sample_path(inst, 11)
    c = arrival_counts(path, 13, 57, n=inst.n)
    assert int(c.sum()) == 57 - 13 + 1


def test_gen_single_resource_values():
    inst = gen_single_resource(1000, 0.8, 2.0, 1.0)
    assert inst.n == 2 and inst.m == 1 and inst.T == 1000
    assert inst.lam.tolist() == [0.5, 0.5]
    assert inst.r.tolist() == [2.0, 1.0]
    assert inst.A.tolist() == [[1.0, 1.0]]
    assert inst.C.tolist() == [800.0]
    with pytest.raises(ValueError):
        gen_single_resource(1000, 0.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        gen_single_resource(0, 0.8, 2.0, 1.0)


def test_scaled_family_scales_T_and_C_only():
    base = gen_single_resource(10, 0.9, 5.0, 1.0)
    fam = ScaledFamily(base=base, k=7)
    inst = fam.instance()
    assert inst.T == 70
    assert inst.C.tolist() == [63.0]
    assert np.array_equal(inst.r, base.r)
    assert np.array_equal(inst.lam, base.lam)
    with pytest.raises(InstanceError):
        ScaledFamily(base=base, k=0).instance()


def test_gen_multi_resource_shape_and_scale_coupling():
    a = gen_multi_resource(2000, seed=7, n_types=40, n_resources=30)
    b = gen_multi_resource(4000, seed=7, n_types=40, n_resources=30)
    assert a.n == 40 and a.m == 30
    assert a.T == 2000 and float(a.C[0]) == 0.8 * 2000
    assert np.all(a.C == a.C[0])
    # same seed pins r and A across scales; only C and T move
    assert np.array_equal(a.r, b.r)
    assert np.array_equal(a.A, b.A)
    assert set(np.unique(a.A)) <= {0.0, 1.0}
    assert np.all(a.r >= 1.0) and np.all(a.r <= 10.0)
    assert np.allclose(a.lam, 1.0 / 40)
    with pytest.raises(ValueError):
        gen_multi_resource(30, seed=7, n_types=40, n_resources=30)


def test_gen_multi_resource_density_near_half():
    inst = gen_multi_resource(1000, seed=3, n_types=100, n_resources=100)
    assert abs(float(inst.A.mean()) - 0.5) < 0.02


def test_json_round_trip_is_exact():
    inst = gen_multi_resource(1000, seed=5, n_types=12, n_resources=4)
    back = instance_from_json(instance_to_json(inst))
    assert back.n == inst.n and back.m == inst.m and back.T == inst.T
    assert np.array_equal(back.lam, inst.lam)
    assert np.array_equal(back.r, inst.r)
    assert np.array_equal(back.A, inst.A)
    assert np.array_equal(back.C, inst.C)


def test_json_declared_shape_mismatch_rejected():
    doc = json.loads(instance_to_json(gen_single_resource(10, 0.8, 2.0, 1.0)))
    doc["n"] = 3
    with pytest.raises(InstanceError) as exc:
        instance_from_json(json.dumps(doc))
    assert exc.value.code == "empty-dimension"
