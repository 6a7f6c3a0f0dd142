import sys

import numpy as np
import pytest

from acme_explain.external import AdapterError, spawn_external_model
from acme_explain.models import CLASSIFICATION, predict_batch

from conftest import child_command


@pytest.fixture
def first_feature_model():
    m = spawn_external_model(child_command("first-feature"))
    yield m
    m.close()


class TestProtocol:
    def test_round_trip(self, first_feature_model):
        out = predict_batch(first_feature_model, [[1.5, 0], [2.5, 0]])
        assert out.tolist() == [1.5, 2.5]

    def test_reuse_across_batches(self, first_feature_model):
        for v in (3.0, 7.0, -1.0):
            assert predict_batch(first_feature_model, [[v, 0]])[0] == v

    def test_linear_child(self):
        m = spawn_external_model(child_command("linear", 2.0, -1.0, 0.5))
        try:
            assert predict_batch(m, [[1.0, 1.0]])[0] == pytest.approx(1.5)
        finally:
            m.close()

    def test_command_as_string(self):
        argv = child_command("first-feature")
        m = spawn_external_model(" ".join(argv))
        try:
            assert predict_batch(m, [[4.0]])[0] == 4.0
        finally:
            m.close()


class TestFailures:
    def test_malformed_response(self):
        m = spawn_external_model(child_command("malformed"))
        try:
            with pytest.raises(AdapterError, match="malformed"):
                predict_batch(m, [[1.0]])
        finally:
            m.close()

    def test_wrong_prediction_count(self):
        m = spawn_external_model(child_command("wrong-count"))
        try:
            with pytest.raises(AdapterError, match="row count"):
                predict_batch(m, [[1.0], [2.0]])
        finally:
            m.close()

    def test_wrong_id(self):
        m = spawn_external_model(child_command("wrong-id"))
        try:
            with pytest.raises(AdapterError, match="id"):
                predict_batch(m, [[1.0]])
        finally:
            m.close()

    def test_crash_surfaces_child_stderr(self):
        m = spawn_external_model(child_command("crash"))
        try:
            with pytest.raises(AdapterError, match="crashed on purpose"):
                predict_batch(m, [[1.0]])
        finally:
            m.close()

    def test_unstartable_command(self):
        with pytest.raises(AdapterError, match="cannot start"):
            spawn_external_model(["/no/such/binary/anywhere"])

    def test_timeout(self):
        silent = [sys.executable, "-c", "import time; time.sleep(60)"]
        m = spawn_external_model(silent, timeout=0.5)
        try:
            with pytest.raises(AdapterError, match="timed out"):
                predict_batch(m, [[1.0]])
        finally:
            m.close()

    def test_classification_requires_n_classes(self):
        with pytest.raises(AdapterError, match="n_classes"):
            spawn_external_model(child_command("first-feature"), task=CLASSIFICATION)
