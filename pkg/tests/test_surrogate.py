import math

import numpy as np
import pytest

from bamoes import gp
from bamoes.errors import ContractError, TrainingDivergedError
from bamoes.models import OlsModel
from bamoes.surrogate import (
    CombinedModel,
    DoeSample,
    SurrogateConfig,
    bamoes_loss,
    predict_with_uncertainty,
    sample_doe,
    train_bamoes,
    train_surrogate,
    train_variant,
    variant_dataset,
)


class Fixed:
    """Base model with a fixed prediction rule."""

    fitted = True

    def __init__(self, fn):
        self.fn = fn

    def fit(self, X, y):
        return self

    def predict(self, X):
        return np.array([self.fn(x) for x in np.atleast_2d(X)], dtype=float)


class Lookup(Fixed):
    """Returns the training target for known rows (a 'perfect' base model)."""

    def __init__(self, X, y):
        self.table = {tuple(x): t for x, t in zip(X, y)}
        super().__init__(lambda x: self.table.get(tuple(x), 0.0))


@pytest.fixture
def sine_data(rng):
    X = np.sort(rng.uniform(0, 6, 40))[:, None]
    return gp.TrainSet(X, np.sin(X[:, 0]) + 0.1 * rng.normal(size=40))


class TestSampleDoe:
    def test_degenerate_column(self, rng):
        X = np.column_stack([rng.normal(size=10), np.full(10, 3.5)])
        S = sample_doe(X, 50, rng)
        assert np.all(S[:, 1] == 3.5)

    def test_empty(self, rng):
        assert sample_doe(np.zeros((3, 2)), 0, rng).shape == (0, 2)

    def test_law_of_large_numbers(self):
        r = np.random.Generator(np.random.Philox(7))
        S = sample_doe(np.array([[0.0], [1.0]]), 10000, r)
        assert abs(S.mean() - 0.5) < 0.02

    def test_inside_box_and_reproducible(self, rng):
        X = rng.normal(size=(20, 3))
        a = sample_doe(X, 100, np.random.Generator(np.random.Philox(3)))
        b = sample_doe(X, 100, np.random.Generator(np.random.Philox(3)))
        np.testing.assert_array_equal(a, b)
        assert np.all(a >= X.min(axis=0)) and np.all(a <= X.max(axis=0))


class TestBamoesLoss:
    def test_c0_is_negative_lml(self, sine_data, rng):
        spec = gp.KernelSpec.initial(sine_data)
        extra = DoeSample(rng.uniform(0, 6, (5, 1)), rng.normal(size=5))
        assert bamoes_loss(spec, sine_data, extra, 0.0) == -gp.log_marginal_likelihood(spec, sine_data)

    def test_c1_perfect_match_is_zero(self, sine_data, rng):
        spec = gp.KernelSpec.initial(sine_data)
        Xp = rng.uniform(0, 6, (5, 1))
        s, _, _ = gp.fit_exact(spec, sine_data).predict(Xp)
        assert bamoes_loss(spec, sine_data, DoeSample(Xp, s), 1.0) == pytest.approx(0.0, abs=1e-20)

    def test_one_point_by_hand(self):
        spec = gp.KernelSpec(np.zeros(1), 0.0, 0.0, 0.0)
        data = gp.TrainSet([[0.0]], [2.0])
        # posterior mean at x'=1: k(1, 0) * alpha = exp(-1/2) * 1
        s = math.exp(-0.5)
        nll = 0.5 * (math.log(2 * math.pi) + math.log(2.0) + 2.0)
        expected = 0.5 * nll + 0.5 * (s - 0.3) ** 2
        assert bamoes_loss(spec, data, DoeSample([[1.0]], [0.3]), 0.5) == pytest.approx(expected, rel=1e-14)
        assert nll == pytest.approx(2.26551, abs=1e-5)


class TestTraining:
    def test_c0_bit_matches_surr1(self, sine_data):
        base = OlsModel().fit(sine_data.inputs, sine_data.targets)
        cfg = SurrogateConfig(weight_C=0.0, epochs_M=60, seed=11)
        a = train_bamoes(base, sine_data, cfg)
        b = train_variant("SurrI", base, sine_data, SurrogateConfig(epochs_M=60, seed=11, variant="SurrI"))
        np.testing.assert_array_equal(a.surrogate.kernel.to_vector(), b.surrogate.kernel.to_vector())

    def test_zero_epochs_returns_initialization(self, sine_data):
        base = OlsModel().fit(sine_data.inputs, sine_data.targets)
        m = train_bamoes(base, sine_data, SurrogateConfig(epochs_M=0))
        np.testing.assert_array_equal(m.surrogate.kernel.to_vector(),
                                      gp.KernelSpec.initial(sine_data).to_vector())

    def test_loss_decreases_on_sine(self, sine_data):
        base = Fixed(lambda x: math.sin(x[0]))
        cfg = SurrogateConfig(weight_C=0.7, epochs_M=200, seed=1)
        m = train_bamoes(base, sine_data, cfg)
        final = bamoes_loss(m.surrogate.kernel, sine_data, _doe(base, sine_data, cfg), 0.7)
        assert final <= m.loss_history[0]
        assert len(m.loss_history) == 200

    def test_deterministic(self, sine_data):
        base = OlsModel().fit(sine_data.inputs, sine_data.targets)
        cfg = SurrogateConfig(epochs_M=40, seed=5)
        a = train_bamoes(base, sine_data, cfg).surrogate.kernel.to_vector()
        b = train_bamoes(base, sine_data, cfg).surrogate.kernel.to_vector()
        np.testing.assert_array_equal(a, b)

    def test_diverging_training_reports_epoch(self, sine_data):
        base = OlsModel().fit(sine_data.inputs, sine_data.targets)
        with pytest.raises(TrainingDivergedError) as info:
            train_bamoes(base, sine_data, SurrogateConfig(epochs_M=50, learning_rate=1e6))
        assert 0 <= info.value.epoch < 50

    def test_wrong_variant(self, sine_data):
        with pytest.raises(ContractError):
            train_bamoes(Fixed(lambda x: 0.0), sine_data, SurrogateConfig(variant="SurrI"))
        with pytest.raises(ContractError):
            train_variant("BAMOES", Fixed(lambda x: 0.0), sine_data, SurrogateConfig())

    def test_config_validation(self):
        with pytest.raises(ContractError):
            SurrogateConfig(weight_C=1.2)
        with pytest.raises(ContractError):
            SurrogateConfig(variant="SurrV")
        with pytest.raises(ContractError):
            SurrogateConfig(learning_rate=0.0)


def _doe(base, data, cfg):
    X = sample_doe(data.inputs, cfg.doe_size(len(data)), np.random.Generator(np.random.Philox(cfg.seed)))
    return DoeSample(X, base.predict(X))


class TestVariants:
    def test_surr2_with_perfect_base_matches_surr1(self, sine_data):
        base = Lookup(sine_data.inputs, sine_data.targets)
        cfg = SurrogateConfig(epochs_M=40, seed=2)
        a = train_variant("SurrI", base, sine_data, cfg)
        b = train_variant("SurrII", base, sine_data, cfg)
        np.testing.assert_array_equal(a.surrogate.kernel.to_vector(), b.surrogate.kernel.to_vector())

    def test_surr4_without_design_points_matches_surr1(self, sine_data):
        base = OlsModel().fit(sine_data.inputs, sine_data.targets)
        cfg = SurrogateConfig(epochs_M=40, seed=2, doe_count_L=0)
        a = train_variant("SurrI", base, sine_data, cfg)
        b = train_variant("SurrIV", base, sine_data, cfg)
        np.testing.assert_array_equal(a.surrogate.kernel.to_vector(), b.surrogate.kernel.to_vector())

    def test_surr3_size(self, sine_data):
        base = Fixed(lambda x: 0.5 * x[0])
        d = variant_dataset("SurrIII", base, sine_data, SurrogateConfig(doe_count_L=17))
        assert len(d) == len(sine_data) + 17
        np.testing.assert_allclose(d.targets, 0.5 * d.inputs[:, 0])

    def test_surr4_keeps_original_targets(self, sine_data):
        base = Fixed(lambda x: 0.0)
        d = variant_dataset("SurrIV", base, sine_data, SurrogateConfig(doe_count_L=5))
        np.testing.assert_array_equal(d.targets[:len(sine_data)], sine_data.targets)
        np.testing.assert_array_equal(d.targets[len(sine_data):], 0.0)

    def test_dispatch(self, sine_data):
        base = Fixed(lambda x: 0.0)
        m = train_surrogate(base, sine_data, SurrogateConfig(variant="SurrIII", epochs_M=5, doe_count_L=3))
        assert m.surrogate.train_inputs.shape[0] == len(sine_data) + 3


class TestCombinedInference:
    def test_interval_standard_normal(self):
        post = gp.fit_exact(gp.KernelSpec(np.zeros(1), 0.0, math.log(1e-300)), gp.TrainSet([[0.0]], [0.0]))
        # far away the latent variance is 1 and noise negligible, so stddev is 1
        m = CombinedModel(Fixed(lambda x: 0.0), post)
        mean, sd, lo, hi = predict_with_uncertainty(m, [1e6], 0.95)
        assert (mean, sd) == pytest.approx((0.0, 1.0))
        assert (lo, hi) == pytest.approx((-1.959963985, 1.959963985), abs=1e-8)

    def test_zero_stddev_collapses(self):
        from bamoes.metrics import normal_interval
        lo, hi = normal_interval(3.0, 0.0, 0.9)
        assert lo == hi == 3.0

    def test_one_point_fixture(self):
        post = gp.fit_exact(gp.KernelSpec(np.zeros(1), 0.0, 0.0, 0.0), gp.TrainSet([[0.0]], [2.0]))
        mean, sd, lo, hi = predict_with_uncertainty(CombinedModel(Fixed(lambda x: 7.0), post), [0.0], 0.5)
        assert mean == 7.0
        assert sd == pytest.approx(math.sqrt(1.5), rel=1e-14)
        assert hi - mean == pytest.approx(mean - lo)

    def test_bad_alpha(self):
        post = gp.fit_exact(gp.KernelSpec(np.zeros(1), 0.0, 0.0), gp.TrainSet([[0.0]], [2.0]))
        with pytest.raises(ContractError):
            predict_with_uncertainty(CombinedModel(Fixed(lambda x: 0.0), post), [0.0], 1.0)


class TestVarianceBehaviour:
    def test_bamoes_variance_keeps_gp_invariants(self, sine_data):
        base = Fixed(lambda x: math.sin(x[0]))
        m = train_bamoes(base, sine_data, SurrogateConfig(epochs_M=100))
        k = m.surrogate.kernel
        _, lv, pv = m.surrogate.predict(sine_data.inputs)
        assert np.all(lv <= k.noise_var + 1e-9)
        assert np.all(pv >= k.noise_var)
        # the conditioning set is the original training inputs
        np.testing.assert_array_equal(m.surrogate.train_inputs, sine_data.inputs)

    def test_far_field_along_rays(self, rng):
        X = rng.normal(size=(25, 2))
        data = gp.TrainSet(X, np.sin(X[:, 0]) * np.cos(X[:, 1]))
        m = train_bamoes(Fixed(lambda x: 0.0), data, SurrogateConfig(epochs_M=50))
        for _ in range(5):
            direction = rng.normal(size=2)
            direction /= np.linalg.norm(direction)
            _, lv, _ = m.surrogate.predict(direction[None, :] * 1e3)
            assert abs(lv[0] - m.surrogate.kernel.signal_var) < 1e-6
