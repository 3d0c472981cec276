"""Model types, validation reports, block assembly, JSON round-trips."""

import numpy as np
import pytest

from ffest import (
    EstimatorModel,
    InnovationJointModel,
    StateSpaceModel,
    Trajectory,
    TriangularJointModel,
    assemble,
    extract,
    flip_state_signs,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    validate,
)
from ffest.errors import ModelFormatError, ValidationError


def make_innovation():
    return InnovationJointModel(
        A=np.array([[0.5, 0.1], [0.0, 0.3]]),
        K=np.array([[0.2, 0.1], [0.0, 0.4]]),
        C=np.array([[1.0, 0.5], [0.0, 1.0]]),
        Q=np.array([[2.0, 1.0], [1.0, 1.0]]),
        p=1, q=1,
    )


def make_triangular():
    return TriangularJointModel(
        A11=[[0.5]], A12=[[0.1]], A22=[[0.3]],
        K11=[[0.2]], K12=[[0.1]], K22=[[0.4]],
        C11=[[1.0]], C12=[[0.5]], C22=[[1.0]],
        Q11=[[2.0]], Q12=[[1.0]], Q22=[[1.0]],
        T=np.eye(2), p1=1, p2=1, p=1, q=1,
    )


class TestConstructors:
    def test_state_space_shapes_enforced(self):
        with pytest.raises(ValidationError):
            StateSpaceModel(
                A=np.eye(2), B=np.zeros((3, 1)),
                C=np.zeros((2, 2)), D=np.zeros((2, 1)), p=1, q=1,
            )

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            InnovationJointModel(
                A=np.array([[np.nan]]), K=np.ones((1, 2)),
                C=np.ones((2, 1)), Q=np.eye(2), p=1, q=1,
            )

    def test_trajectory_sample_count_mismatch(self):
        with pytest.raises(ValidationError):
            Trajectory(y=np.zeros((5, 1)), w=np.zeros((4, 1)))

    def test_estimator_dims(self):
        e = EstimatorModel(
            Atil=np.eye(2) * 0.5, Ktil=np.zeros((2, 3)),
            Ctil=np.zeros((1, 2)), D0=np.zeros((1, 3)),
        )
        assert (e.n, e.p, e.q) == (2, 1, 3)


class TestValidate:
    def test_stable_model_passes(self):
        assert validate(make_innovation()).ok

    def test_unstable_a_reported(self):
        m = StateSpaceModel(
            A=2.0 * np.eye(2), B=np.eye(2),
            C=np.eye(2), D=np.zeros((2, 2)), p=1, q=1,
        )
        report = validate(m)
        assert not report.ok
        assert any("spectral radius" in v for v in report.violations)

    def test_indefinite_q_reported(self):
        m = make_innovation()
        m.Q = np.diag([1.0, -1.0])
        report = validate(m)
        assert not report.ok
        assert any("positive definite" in v for v in report.violations)

    def test_report_is_truthy_boolean(self):
        assert bool(validate(make_innovation())) is True


class TestAssembleExtract:
    def test_round_trip(self):
        t = make_triangular()
        m = assemble(t)
        assert np.allclose(m.A, [[0.5, 0.1], [0.0, 0.3]])
        assert np.allclose(m.Q, [[2.0, 1.0], [1.0, 1.0]])
        back = extract(m, p1=1)
        for name in ("A11", "A12", "A22", "K11", "K12", "K22",
                     "C11", "C12", "C22", "Q11", "Q12", "Q22"):
            assert np.allclose(getattr(back, name), getattr(t, name))

    def test_extract_rejects_nonzero_lower_left(self):
        m = make_innovation()
        m.A = np.array([[0.5, 0.1], [0.2, 0.3]])
        with pytest.raises(ValidationError):
            extract(m, p1=1)

    def test_flip_state_signs_preserves_dynamics(self):
        t = make_triangular()
        f = flip_state_signs(t, [-1, 1])
        # similarity with S = diag(-1, 1): eigenvalues and Q unchanged
        assert np.allclose(np.sort(np.linalg.eigvals(f.A)),
                           np.sort(np.linalg.eigvals(t.A)))
        assert np.allclose(f.Q, t.Q)
        assert np.allclose(f.C11, -t.C11)
        assert np.allclose(f.A12, -t.A12)

    def test_flip_state_signs_rejects_bad_signs(self):
        with pytest.raises(ValidationError):
            flip_state_signs(make_triangular(), [2, 1])


class TestJson:
    @pytest.mark.parametrize("model", [
        StateSpaceModel(A=0.5 * np.eye(2), B=np.eye(2),
                        C=np.eye(2), D=np.zeros((2, 2)), p=1, q=1),
        make_innovation(),
        make_triangular(),
        EstimatorModel(Atil=[[0.5]], Ktil=[[1.0]], Ctil=[[2.0]], D0=[[0.3]]),
    ])
    def test_dict_round_trip(self, model):
        back = model_from_dict(model_to_dict(model))
        assert type(back) is type(model)
        d1, d2 = model_to_dict(model), model_to_dict(back)
        assert d1 == d2

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "m.json"
        save_model(make_innovation(), path)
        back = load_model(path)
        assert np.allclose(back.A, make_innovation().A)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ModelFormatError):
            model_from_dict({"kind": "mystery"})

    def test_missing_field_rejected(self):
        doc = model_to_dict(make_innovation())
        del doc["Q"]
        with pytest.raises(ModelFormatError):
            model_from_dict(doc)

    def test_unknown_field_rejected(self):
        doc = model_to_dict(make_innovation())
        doc["extra"] = 1
        with pytest.raises(ModelFormatError):
            model_from_dict(doc)

    def test_inconsistent_n_rejected(self):
        doc = model_to_dict(make_innovation())
        doc["n"] = 7
        with pytest.raises(ModelFormatError):
            model_from_dict(doc)

    def test_invalid_json_file_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ModelFormatError):
            load_model(path)
