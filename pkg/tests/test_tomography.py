"""Tests for single-photon tomography with non-ideal polarizers."""
import numpy as np
import pytest

from src.engine.states import random_direction, random_state
from src.engine.tomography import TomographyRecord, simulate_statistics, tomographic_reconstruct
from src.models.errors import InconsistentStatisticsError, NotTomographicallyCompleteError
from src.models.polarization import CIRCULAR, DIAGONAL, HORIZONTAL, VERTICAL, DensityMatrix, PolarizationVector

AXES = [DIAGONAL, CIRCULAR, HORIZONTAL]
COMPLETE = [DIAGONAL, PolarizationVector(1, -1), CIRCULAR, HORIZONTAL]


class TestReconstruction:
    """Tests for tomographic_reconstruct."""

    def test_maximally_mixed_from_half_frequencies(self):
        stats = [TomographyRecord(direction=z, eps=0.0, eps_prime=0.0, freq=0.5) for z in AXES]
        rho = tomographic_reconstruct(stats)
        assert rho.matrix.max_abs_diff(DensityMatrix.maximally_mixed(2).matrix) < 1e-12

    def test_imperfect_polarizers_pure_state(self):
        target = DensityMatrix.pure(HORIZONTAL)
        stats = simulate_statistics(target, COMPLETE, eps=0.2, eps_prime=0.1)
        rho = tomographic_reconstruct(stats)
        assert rho.matrix.max_abs_diff(target.matrix) < 1e-10

    def test_random_round_trip(self):
        """Exact statistics of random states invert back to the state."""
        rng = np.random.default_rng(21)
        for _ in range(100):
            target = random_state(rng, dim=2)
            eps = float(rng.uniform(0.0, 0.5))
            eps_prime = float(rng.uniform(0.0, eps))
            dirs = AXES + [random_direction(rng) for _ in range(2)]
            rho = tomographic_reconstruct(simulate_statistics(target, dirs, eps, eps_prime))
            assert rho.matrix.max_abs_diff(target.matrix) < 1e-10

    def test_redundant_inconsistent_directions(self):
        """Six directions with frequencies no state produces still give a unit-trace state."""
        dirs = [DIAGONAL, PolarizationVector(1, -1), CIRCULAR, PolarizationVector(1, -1j), HORIZONTAL, VERTICAL]
        freqs = [0.6, 0.6, 0.5, 0.5, 0.5, 0.5]
        stats = [TomographyRecord(direction=z, eps=0.0, eps_prime=0.0, freq=f) for z, f in zip(dirs, freqs)]
        rho = tomographic_reconstruct(stats)
        assert rho.matrix.trace().real == pytest.approx(1.0, abs=1e-12)
        assert rho.matrix.max_abs_diff(DensityMatrix.maximally_mixed(2).matrix) < 1e-12

    def test_noisy_frequencies_are_projected(self):
        rng = np.random.default_rng(22)
        target = DensityMatrix.pure(DIAGONAL)
        dirs = COMPLETE + [random_direction(rng) for _ in range(4)]
        stats = [
            TomographyRecord(direction=r.direction, eps=r.eps, eps_prime=r.eps_prime,
                             freq=r.freq + float(rng.normal(0.0, 1e-7)))
            for r in simulate_statistics(target, dirs, 0.1, 0.05)
        ]
        rho = tomographic_reconstruct(stats)
        assert rho.matrix.trace().real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(rho.data).min() >= -1e-12
        assert rho.matrix.max_abs_diff(target.matrix) < 1e-5

    def test_empty_statistics(self):
        with pytest.raises(NotTomographicallyCompleteError):
            tomographic_reconstruct([])

    def test_coplanar_directions_incomplete(self):
        stats = simulate_statistics(DensityMatrix.pure(DIAGONAL), [HORIZONTAL, VERTICAL, DIAGONAL])
        with pytest.raises(NotTomographicallyCompleteError):
            tomographic_reconstruct(stats)

    def test_unphysical_statistics(self):
        stats = [TomographyRecord(direction=z, eps=0.0, eps_prime=0.0, freq=1.0) for z in AXES]
        with pytest.raises(InconsistentStatisticsError):
            tomographic_reconstruct(stats)

    def test_record_round_trip(self):
        rec = TomographyRecord(direction=DIAGONAL, eps=0.2, eps_prime=0.1, freq=0.55)
        assert TomographyRecord.from_dict(rec.to_dict()) == rec


@pytest.mark.slow
class TestReconstructionAtScale:
    """Round trips over many random states and polarizers."""

    def test_two_hundred_round_trips(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            target = random_state(rng, dim=2, rank=int(rng.integers(1, 3)))
            eps = float(rng.uniform(0.0, 0.5))
            eps_prime = float(rng.uniform(0.0, eps))
            dirs = COMPLETE + [random_direction(rng) for _ in range(int(rng.integers(0, 4)))]
            rho = tomographic_reconstruct(simulate_statistics(target, dirs, eps, eps_prime))
            assert rho.matrix.max_abs_diff(target.matrix) < 1e-9
