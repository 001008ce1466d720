import random

import pytest

from apekit.bootstrap import bootstrap_significance


def make_test_set(n=40, seed=2):
    rng = random.Random(seed)
    words = "der zug kommt heute nicht an weil es schneit draußen".split()
    refs = [" ".join(rng.choices(words, k=rng.randint(4, 9))) for _ in range(n)]
    # System A copies the reference with occasional errors, B errs more.
    def corrupt(text, p):
        tokens = text.split()
        return " ".join("xxx" if rng.random() < p else t for t in tokens)

    hyps_a = [corrupt(r, 0.1) for r in refs]
    hyps_b = [corrupt(r, 0.45) for r in refs]
    return hyps_a, hyps_b, refs


def test_identical_systems_tie_everywhere():
    _, _, refs = make_test_set()
    hyps = [r.upper() for r in refs]
    result = bootstrap_significance(hyps, list(hyps), refs, n_samples=200, seed=1)
    assert result.ties == 200
    assert result.wins_a == result.wins_b == 0
    assert result.p_value == 1.0


def test_identical_systems_never_significant_across_seeds():
    _, _, refs = make_test_set(n=25)
    hyps = list(refs)
    for seed in range(100):
        result = bootstrap_significance(hyps, list(hyps), refs, n_samples=50, seed=seed)
        assert result.p_value == 1.0


def test_dominant_system_wins_every_sample():
    _, _, refs = make_test_set()
    hyps_a = list(refs)
    hyps_b = ["" for _ in refs]
    result = bootstrap_significance(hyps_a, hyps_b, refs, n_samples=1000, seed=7)
    assert result.wins_a == 1000
    assert result.p_value == 0.0


def test_default_sample_count_is_1000():
    _, _, refs = make_test_set(n=10)
    result = bootstrap_significance(list(refs), list(refs), refs, seed=0)
    assert result.n_samples == 1000


def test_deterministic_per_seed():
    hyps_a, hyps_b, refs = make_test_set()
    one = bootstrap_significance(hyps_a, hyps_b, refs, n_samples=300, seed=99)
    two = bootstrap_significance(hyps_a, hyps_b, refs, n_samples=300, seed=99)
    assert one == two


def test_tallies_always_sum_to_n_samples():
    hyps_a, hyps_b, refs = make_test_set(seed=5)
    for statistic in ("bleu", "ter", "sentence_bleu"):
        result = bootstrap_significance(
            hyps_a, hyps_b, refs, n_samples=100, seed=3, statistic=statistic
        )
        assert result.wins_a + result.wins_b + result.ties == 100
        assert 0.0 <= result.p_value <= 1.0


def test_better_system_wins_with_ter_statistic():
    hyps_a, hyps_b, refs = make_test_set(seed=6)
    result = bootstrap_significance(hyps_a, hyps_b, refs, n_samples=200, seed=4, statistic="ter")
    assert result.wins_a > result.wins_b


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        bootstrap_significance(["a"], ["b", "c"], ["r"], n_samples=10, seed=0)


def test_bad_statistic_rejected():
    with pytest.raises(ValueError):
        bootstrap_significance(["a"], ["b"], ["r"], n_samples=10, seed=0, statistic="comet")
