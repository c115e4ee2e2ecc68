import numpy as np
import pytest

from attacks import (
    AttackKind,
    ThresholdAttack,
    Top3Attack,
    Top3Settings,
    candidate_thresholds,
    entropy,
    fit_entropy_threshold,
    fit_max_score_threshold,
    fit_top3,
    guaranteed_member_margin,
    load_attack,
    max_entropy_given_max,
    max_score,
    predict_membership,
    save_attack,
    scaling_sweep,
    top3_features,
)
from data import MixtureSpec, bounding_box, generate_mixture, make_uniform_noise
from helpers import make_records, random_score_vectors
from metrics import auroc, roc_curve
from network import Activation, NetworkConfig, OptimizerSpec, TrainConfig, init_network, predict_scores, train
from utils.errors import ModelFormatError


def _two_class(max_scores):
    return np.array([[m, 1.0 - m] for m in max_scores])


def _exhaustive_decisions(values, flags, member_if_greater):
    """Best achievable decision set by brute force, preferring the fewest positives among ties."""
    n = values.size
    candidates = [np.zeros(n, dtype=bool)]
    for v in np.unique(values):
        candidates.append(values >= v if member_if_greater else values <= v)
    best, best_j = None, -np.inf
    for decisions in candidates:
        j = decisions[flags].mean() - decisions[~flags].mean()
        if j > best_j + 1e-12 or (abs(j - best_j) <= 1e-12 and decisions.sum() < best.sum()):
            best, best_j = decisions, j
    return best, best_j


def _random_record_set(rng):
    n = int(rng.integers(4, 41))
    d = int(rng.integers(2, 6))
    pool = random_score_vectors(rng, int(rng.integers(2, n + 1)), d, sharpness=float(rng.uniform(0.5, 4.0)))
    scores = pool[rng.integers(0, pool.shape[0], size=n)]
    flags = np.zeros(n, dtype=bool)
    flags[rng.permutation(n)[:int(rng.integers(1, n))]] = True
    return scores, flags


@pytest.mark.parametrize("fit, statistic, member_if_greater", [
    (fit_max_score_threshold, max_score, True),
    (fit_entropy_threshold, entropy, False),
])
def test_threshold_fit_matches_exhaustive_search(rng, fit, statistic, member_if_greater):
    for _ in range(200):
        scores, flags = _random_record_set(rng)
        attack = fit(make_records(scores, flags))
        expected, best_j = _exhaustive_decisions(statistic(scores), flags, member_if_greater)
        decisions = attack.decide(scores).astype(bool)
        assert decisions[flags].mean() - decisions[~flags].mean() == pytest.approx(best_j, abs=1e-12)
        np.testing.assert_array_equal(decisions, expected)


def test_ties_prefer_the_lowest_false_positive_rate():
    scores = _two_class([0.6, 0.9, 0.5, 0.7])
    records = make_records(scores, [1, 1, 0, 0])

    max_attack = fit_max_score_threshold(records)
    assert max_attack.tau == pytest.approx(0.8)
    assert max_attack.decide(scores).tolist() == [0, 1, 0, 0]

    entropy_attack = fit_entropy_threshold(records)
    h = entropy(scores)
    assert entropy_attack.tau == pytest.approx((h[1] + h[3]) / 2.0)
    assert entropy_attack.decide(scores).tolist() == [0, 1, 0, 0]


def test_identical_statistics_give_no_positive_decisions():
    scores = _two_class([0.7, 0.7, 0.7, 0.7])
    records = make_records(scores, [1, 0, 1, 0])
    assert fit_max_score_threshold(records).tau == np.inf
    assert fit_entropy_threshold(records).tau == -np.inf
    assert fit_max_score_threshold(records).decide(scores).sum() == 0
    assert fit_entropy_threshold(records).decide(scores).sum() == 0


def test_fitting_needs_both_membership_classes(rng):
    scores = random_score_vectors(rng, 5, 3)
    with pytest.raises(ValueError, match="both"):
        fit_max_score_threshold(make_records(scores, [1] * 5))
    with pytest.raises(ValueError):
        fit_top3(make_records(scores, [0] * 5), seed=0)


def test_candidate_thresholds_include_sentinels():
    thresholds = candidate_thresholds(np.array([0.2, 0.4, 0.4, 0.8]))
    np.testing.assert_allclose(thresholds[1:-1], [0.3, 0.6])
    assert thresholds[0] == -np.inf and thresholds[-1] == np.inf


def test_entropy_handles_zero_scores():
    assert entropy(np.array([1.0, 0.0, 0.0])) == 0.0
    assert entropy(np.full(4, 0.25)) == pytest.approx(np.log(4))


def test_predict_membership_for_a_single_vector():
    decision, raw = predict_membership(ThresholdAttack(statistic=AttackKind.ENTROPY, tau=0.5), [0.95, 0.05])
    assert decision == 1
    assert raw == pytest.approx(-entropy(np.array([0.95, 0.05])))
    with pytest.raises(ValueError):
        predict_membership(ThresholdAttack(statistic="max", tau=0.5), [0.7, 0.7])


def test_threshold_attack_rejects_top3_statistic():
    with pytest.raises(ValueError):
        ThresholdAttack(statistic=AttackKind.TOP3, tau=0.5)


def test_top3_features_sort_and_pad():
    np.testing.assert_array_equal(top3_features(np.array([0.1, 0.6, 0.05, 0.25])), [0.6, 0.25, 0.1])
    np.testing.assert_array_equal(top3_features(np.array([[0.3, 0.7]])), [[0.7, 0.3, 0.0]])


def _top3_records(rng, n=120):
    members = random_score_vectors(rng, n, 5, sharpness=5.0)
    nonmembers = random_score_vectors(rng, n, 5, sharpness=0.3)
    return make_records(np.vstack([members, nonmembers]), [1] * n + [0] * n)


def test_fit_top3_is_deterministic_and_separates_sharp_scores(rng):
    records = _top3_records(rng)
    settings = Top3Settings(hidden_units=8, max_epochs=30, patience=5)
    attack = fit_top3(records, seed=5, settings=settings)
    again = fit_top3(records, seed=5, settings=settings)

    assert 1 <= attack.epochs_trained <= 30
    assert all(np.array_equal(a, b) for a, b in zip(attack.network.parameters, again.network.parameters))
    scores = np.vstack([r.scores for r in records])
    raw = attack.raw_scores(scores)
    assert np.all((raw > 0.0) & (raw < 1.0))
    assert raw[:120].mean() > raw[120:].mean()


def test_top3_trained_on_shuffled_membership_stays_at_chance():
    settings = Top3Settings(hidden_units=8, max_epochs=40, patience=5)
    aurocs = []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        records = _top3_records(rng, n=100)
        shuffled = rng.permutation([r.is_member for r in records])
        attack = fit_top3(make_records(np.vstack([r.scores for r in records]), shuffled), seed=seed,
                          settings=settings)

        held_out = np.vstack([random_score_vectors(rng, 1000, 5, sharpness=5.0),
                              random_score_vectors(rng, 1000, 5, sharpness=0.3)])
        truths = rng.permutation([True] * 1000 + [False] * 1000)
        aurocs.append(auroc(roc_curve(attack.raw_scores(held_out), truths)))

    assert all(0.4 <= a <= 0.6 for a in aurocs), aurocs
    assert 0.45 <= np.mean(aurocs) <= 0.55


def test_top3_output_ignores_score_order(rng):
    net = init_network(Top3Settings(hidden_units=4).network_config(), 1)
    attack = Top3Attack(network=net)
    scores = random_score_vectors(rng, 10, 6)
    shuffled = scores[:, rng.permutation(6)]
    np.testing.assert_array_equal(attack.raw_scores(scores), attack.raw_scores(shuffled))


def test_top3_attack_validation():
    with pytest.raises(ValueError):
        Top3Attack(network=init_network(NetworkConfig(input_dim=3, hidden_dims=(4,), num_classes=2), 0))
    with pytest.raises(ValueError):
        Top3Attack(network=init_network(Top3Settings().network_config(), 0), cutoff=1.0)


def test_attack_files_roundtrip(tmp_path, rng):
    scores = random_score_vectors(rng, 20, 4)
    threshold = ThresholdAttack(statistic=AttackKind.MAX_SCORE, tau=0.4375)
    loaded = load_attack(save_attack(threshold, tmp_path / "max.mianet"))
    assert loaded == threshold

    top3 = Top3Attack(network=init_network(Top3Settings(hidden_units=6).network_config(), 3), cutoff=0.4)
    loaded = load_attack(save_attack(top3, tmp_path / "top3.mianet"))
    assert isinstance(loaded, Top3Attack) and loaded.cutoff == 0.4
    np.testing.assert_array_equal(loaded.raw_scores(scores), top3.raw_scores(scores))


def test_load_attack_rejects_model_files(tmp_path):
    from network import save_network
    path = save_network(init_network(NetworkConfig(input_dim=2, hidden_dims=(3,), num_classes=2), 0),
                        tmp_path / "target.mianet")
    with pytest.raises(ModelFormatError, match="attack"):
        load_attack(path)


def test_max_score_margin_is_one_minus_tau():
    assert guaranteed_member_margin(ThresholdAttack(statistic="max", tau=0.8), 4) == pytest.approx(0.2)
    assert guaranteed_member_margin(ThresholdAttack(statistic="max", tau=0.1), 4) == pytest.approx(0.75)
    assert np.isnan(guaranteed_member_margin(ThresholdAttack(statistic="max", tau=np.inf), 4))


def test_entropy_margin_is_the_largest_safe_value():
    attack = ThresholdAttack(statistic="entropy", tau=0.3)
    eps = guaranteed_member_margin(attack, 4)
    assert 0.0 < eps < 0.75
    assert max_entropy_given_max(eps, 4) <= 0.3
    assert max_entropy_given_max(eps + 1e-9, 4) > 0.3
    assert guaranteed_member_margin(ThresholdAttack(statistic="entropy", tau=np.log(4)), 4) == 0.75
    assert np.isnan(guaranteed_member_margin(ThresholdAttack(statistic="entropy", tau=-np.inf), 4))


def _vectors_with_max_at_least(rng, bound, d):
    """A score vector whose largest entry is at least ``bound``."""
    top = bound + (1.0 - bound) * rng.uniform()
    rest = (1.0 - top) * rng.dirichlet(np.ones(d - 1))
    s = np.concatenate([[top], rest])
    return s[rng.permutation(d)]


def test_inside_the_margin_every_vector_is_a_member():
    rng = np.random.default_rng(99)
    violations = 0
    for _ in range(10_000):
        d = int(rng.integers(2, 11))
        if rng.uniform() < 0.5:
            attack = ThresholdAttack(statistic="max", tau=rng.uniform(1.0 / d, 1.0))
            eps = (1.0 - attack.tau) * rng.uniform()
        else:
            attack = ThresholdAttack(statistic="entropy", tau=rng.uniform(0.0, np.log(d)))
            eps = guaranteed_member_margin(attack, d) * rng.uniform()
        s = _vectors_with_max_at_least(rng, 1.0 - eps, d)
        if s.max() >= 1.0 - eps and attack.decide(s[None, :])[0] != 1:
            violations += 1
    assert violations == 0


def _leaky_target(dataset):
    config = NetworkConfig(input_dim=2, hidden_dims=(32, 32), num_classes=4, activation=Activation.LEAKY_RELU)
    net, _ = train(init_network(config, 0), dataset,
                   TrainConfig(epochs=40, batch_size=32, optimizer=OptimizerSpec(lr=0.01), seed=0))
    return net


def test_scaling_saturates_max_scores_and_threshold_attacks(separable_dataset):
    net = _leaky_target(separable_dataset)
    low, high = bounding_box(separable_dataset)
    nonmembers = make_uniform_noise(low, high, 500, num_classes=4, seed=21)
    attacks = {
        "max": ThresholdAttack(statistic="max", tau=0.99),
        "entropy": ThresholdAttack(statistic="entropy", tau=0.05),
        "top3": Top3Attack(network=init_network(Top3Settings(hidden_units=4).network_config(), 2)),
    }
    table = scaling_sweep(net, attacks, nonmembers, deltas=[1.0, 100.0, 1e6])

    assert list(table.columns) == ["delta", "mean_max_score", "frac_member_max", "frac_member_entropy",
                                   "frac_member_top3", "frac_guaranteed_max", "frac_guaranteed_entropy"]
    assert table["delta"].tolist() == [1.0, 100.0, 1e6]
    last = table.iloc[-1]
    assert last["mean_max_score"] >= 0.999
    assert last["frac_member_max"] >= 0.99
    assert last["frac_member_entropy"] >= 0.99
    assert last["frac_guaranteed_max"] >= 0.99
    assert np.all((table.drop(columns="delta").to_numpy() >= 0.0) & (table.drop(columns="delta").to_numpy() <= 1.0))


def test_scaling_sweep_validates_deltas(separable_dataset):
    net = init_network(NetworkConfig(input_dim=2, hidden_dims=(4,), num_classes=4), 0)
    with pytest.raises(ValueError):
        scaling_sweep(net, {}, separable_dataset, deltas=[10.0, 1.0])
    with pytest.raises(ValueError):
        scaling_sweep(net, {}, separable_dataset, deltas=[0.0, 1.0])
    with pytest.raises(ValueError):
        scaling_sweep(net, {}, separable_dataset.subset([]))


@pytest.mark.parametrize("temperature", [1.0, 3.0])
def test_unit_scale_row_matches_unscaled_decisions(separable_dataset, temperature):
    net = _leaky_target(separable_dataset)
    nonmembers = generate_mixture(MixtureSpec.on_circle(num_classes=4, radius=6.0, std=1.5, dim=2), 300, seed=8)
    attacks = {
        "max": ThresholdAttack(statistic="max", tau=0.4),
        "entropy": ThresholdAttack(statistic="entropy", tau=0.5),
        "top3": Top3Attack(network=init_network(Top3Settings(hidden_units=4).network_config(), 2)),
    }
    table = scaling_sweep(net, attacks, nonmembers, deltas=[1.0, 10.0], temp=temperature)

    scores = predict_scores(net, nonmembers.features, temperature)
    first = table.iloc[0]
    assert first["delta"] == 1.0
    assert first["mean_max_score"] == float(scores.max(axis=1).mean())
    for name, attack in attacks.items():
        assert first[f"frac_member_{name}"] == float(attack.decide(scores).mean())
