import numpy as np
import pytest

from vislit.sal2lit import (LevelScheme, TrainConfig, completeness_gap,
                            evaluate, forward, init_params, integrated_gradients,
                            load_model, oversample, oversample_round_robin,
                            predict, quantile_bin, save_model, softmax, train)
from vislit.sal2lit.network import (backward, input_gradient,
                                    mean_cross_entropy)

TINY = (16, 8)  # small trunk keeps the numeric checks fast


def tiny_net(rng_seed=0, n_inputs=6, n_levels=3):
    return init_params(n_inputs, n_levels, seed=rng_seed, trunk_widths=TINY)


class TestQuantileBin:
    def test_balanced_labels(self, rng):
        scores = rng.random(200)
        scheme, labels = quantile_bin(scores, 4)
        counts = np.bincount(labels)
        assert counts.min() >= 45  # near 50 each

    def test_boundary_goes_to_lower_bin(self):
        scheme = LevelScheme(2, np.array([0.5]))
        assert scheme.assign([0.5, 0.51, 0.49]).tolist() == [0, 1, 0]

    def test_degenerate_scores_rejected(self):
        with pytest.raises(ValueError):
            quantile_bin([1.0] * 30, 3)

    def test_level_range_validation(self, rng):
        for bad in (1, 6):
            with pytest.raises(ValueError):
                quantile_bin(rng.random(50), bad)

    def test_assign_new_scores(self, rng):
        scheme, _ = quantile_bin(rng.random(100), 3)
        out = scheme.assign([0.0, 1.0])
        assert out[0] == 0 and out[1] == 2


class TestOversample:
    def test_balances_counts(self):
        labels = np.array([0] * 10 + [1] * 3)
        idx = oversample(np.arange(13), labels, seed=0)
        counts = np.bincount(labels[idx])
        assert counts.tolist() == [10, 10]

    def test_keeps_originals_first(self):
        labels = np.array([0, 0, 0, 1])
        idx = oversample(np.arange(4), labels, seed=1)
        assert idx[:4].tolist() == [0, 1, 2, 3]
        assert set(idx[4:]) <= {3}

    def test_deterministic(self):
        labels = np.array([0] * 8 + [1] * 2)
        a = oversample(np.arange(10), labels, seed=5)
        b = oversample(np.arange(10), labels, seed=5)
        assert np.array_equal(a, b)

    def test_round_robin_balances_each_head(self, rng):
        labels3 = [rng.integers(0, 2, 40) for _ in range(3)]
        idx = oversample_round_robin(labels3, seed=0)
        # the last head processed is balanced exactly; earlier heads got a
        # full pass too, so no class may dominate badly
        last = np.bincount(labels3[2][idx])
        assert last[0] == last[1]
        assert idx.max() < 40


class TestNetwork:
    def test_forward_shapes(self, rng):
        p = tiny_net()
        logits = forward(p, rng.random((5, 6)))
        assert len(logits) == 3
        assert all(l.shape == (5, 3) for l in logits)

    def test_softmax_rows_sum_to_one(self, rng):
        s = softmax(rng.normal(0, 10, (4, 5)))
        assert np.allclose(s.sum(axis=1), 1.0)
        assert (s > 0).all()

    def test_wrong_input_width_rejected(self, rng):
        with pytest.raises(ValueError):
            forward(tiny_net(), rng.random((2, 7)))

    def test_init_deterministic(self):
        a = tiny_net(rng_seed=3)
        b = tiny_net(rng_seed=3)
        for x, y in zip(a.all_arrays(), b.all_arrays()):
            assert np.array_equal(x, y)

    def test_loss_gradient_matches_finite_differences(self, rng):
        p = tiny_net(rng_seed=2)
        x = rng.random((7, 6))
        labels3 = [rng.integers(0, 3, 7) for _ in range(3)]
        logits, cache = forward(p, x, keep_cache=True)
        grads = backward(p, cache, logits, labels3)
        arrays = p.all_arrays()
        garrays = grads.all_arrays()
        h = 1e-5
        rel_errs = []
        for ai in range(len(arrays)):
            flat = arrays[ai].ravel()
            for k in rng.choice(flat.size, size=min(5, flat.size), replace=False):
                orig = flat[k]
                flat[k] = orig + h
                up = mean_cross_entropy(forward(p, x), labels3)
                flat[k] = orig - h
                dn = mean_cross_entropy(forward(p, x), labels3)
                flat[k] = orig
                fd = (up - dn) / (2 * h)
                g = garrays[ai].ravel()[k]
                rel_errs.append(abs(g - fd) / max(abs(g), abs(fd), 1e-8))
        assert max(rel_errs) < 1e-4

    def test_input_gradient_matches_finite_differences(self, rng):
        p = tiny_net(rng_seed=4)
        x = rng.random(6) + 0.1
        g = input_gradient(p, x, head=1, target_class=2)[0]
        h = 1e-5
        for i in range(6):
            xp = x.copy(); xp[i] += h
            xm = x.copy(); xm[i] -= h
            fd = (forward(p, xp[None])[1][0, 2]
                  - forward(p, xm[None])[1][0, 2]) / (2 * h)
            assert g[i] == pytest.approx(fd, abs=1e-6)

    def test_save_load_round_trip(self, tmp_path, rng):
        p = tiny_net(rng_seed=9)
        path = tmp_path / "m.bin"
        save_model(path, p)
        q = load_model(path)
        save_model(tmp_path / "m2.bin", q)
        assert (tmp_path / "m2.bin").read_bytes() == path.read_bytes()
        # weights survive as the float32 rounding of the originals
        for a, b in zip(p.all_arrays(), q.all_arrays()):
            assert np.array_equal(a.astype("<f4").astype(np.float64), b)

    def test_bad_magic_rejected(self, tmp_path):
        (tmp_path / "junk.bin").write_bytes(b"XXXX" + b"\0" * 32)
        with pytest.raises(ValueError):
            load_model(tmp_path / "junk.bin")


def separable_dataset(n=120, seed=0):
    """Features whose first three columns directly encode the three labels."""
    rng = np.random.default_rng(seed)
    labels3 = [rng.integers(0, 2, n) for _ in range(3)]
    x = rng.normal(0, 0.05, (n, 6))
    for k in range(3):
        x[:, k] += labels3[k]
    return x, labels3


class TestTraining:
    def test_deterministic_under_seed(self):
        x, labels3 = separable_dataset()
        cfg = TrainConfig(seed=11, max_epochs=5, batch_size=32,
                          trunk_widths=TINY, learning_rate=1e-3)
        p1, h1 = train(x, labels3, cfg)
        p2, h2 = train(x, labels3, cfg)
        for a, b in zip(p1.all_arrays(), p2.all_arrays()):
            assert np.array_equal(a, b)
        assert h1.epochs == h2.epochs

    def test_learns_separable_data(self):
        x, labels3 = separable_dataset(n=200)
        cfg = TrainConfig(seed=0, max_epochs=120, batch_size=64,
                          trunk_widths=TINY, learning_rate=3e-3)
        params, history = train(x, labels3, cfg)
        accs, macro = evaluate(params, x, labels3)
        assert macro > 0.95
        assert history.best_epoch >= 0

    def test_returns_best_validation_snapshot(self):
        x, labels3 = separable_dataset(n=150, seed=3)
        cfg = TrainConfig(seed=2, max_epochs=40, batch_size=64,
                          trunk_widths=TINY, learning_rate=3e-3)
        params, history = train(x, labels3, cfg)
        val_losses = [v for _, _, v in history.epochs]
        assert history.best_val_loss == pytest.approx(min(val_losses))
        # recompute the validation loss of the returned weights and confirm
        # it matches the recorded best, proving the snapshot was restored
        rng = np.random.default_rng(cfg.seed)
        perm = rng.permutation(len(x))
        n_val = max(1, int(round(cfg.validation_fraction * len(x))))
        val_idx = perm[:n_val]
        loss = mean_cross_entropy(forward(params, x[val_idx]),
                                  [l[val_idx] for l in labels3])
        assert loss == pytest.approx(history.best_val_loss, abs=1e-12)

    def test_label_row_mismatch(self):
        with pytest.raises(ValueError):
            train(np.zeros((4, 3)), [np.zeros(5, dtype=int)] * 3,
                  TrainConfig(seed=0, trunk_widths=TINY))

    def test_predict_shapes(self):
        x, labels3 = separable_dataset(n=30)
        cfg = TrainConfig(seed=0, max_epochs=2, batch_size=16,
                          trunk_widths=TINY)
        params, _ = train(x, labels3, cfg)
        levels, probs = predict(params, x)
        assert len(levels) == 3
        assert all(l.shape == (30,) for l in levels)
        assert all(np.allclose(p.sum(axis=1), 1.0) for p in probs)


class TestIntegratedGradients:
    def test_exact_on_locally_linear_region(self, rng):
        # non-negative weights and inputs keep every ReLU active along the
        # whole straight-line path, so the head logit is linear in x there
        p = tiny_net(rng_seed=6)
        for arr in p.weights + p.head_weights:
            np.abs(arr, out=arr)
        x = rng.random(6) + 0.5
        attr = integrated_gradients(p, x, head=0, target_class=1, steps=4)
        fx = forward(p, x[None])[0][0, 1]
        f0 = forward(p, np.zeros((1, 6)))[0][0, 1]
        assert attr.sum() == pytest.approx(fx - f0, rel=1e-12)

    def test_completeness_within_one_percent(self, rng):
        p = tiny_net(rng_seed=8)
        x = rng.random(6)
        gap, delta = completeness_gap(p, x, head=2, target_class=0, steps=256)
        assert gap <= 0.01 * max(abs(delta), 1e-12)

    def test_zero_input_zero_attribution(self):
        p = tiny_net()
        attr = integrated_gradients(p, np.zeros(6), head=0, target_class=0)
        assert not attr.any()

    def test_more_steps_shrink_the_gap(self, rng):
        p = tiny_net(rng_seed=10)
        x = rng.random(6) * 2 - 1
        gap_few, _ = completeness_gap(p, x, 0, 0, steps=4)
        gap_many, _ = completeness_gap(p, x, 0, 0, steps=512)
        assert gap_many <= gap_few + 1e-12

    def test_step_validation(self):
        with pytest.raises(ValueError):
            integrated_gradients(tiny_net(), np.zeros(6), 0, 0, steps=0)
