"""Integration tests for the HTTP routes"""
import json
from pathlib import Path

import pytest

pytest.importorskip("httpx")

from fastapi.testclient import TestClient

from api.api_constants import API_PREFIX, CHECK, MEDIATE, SOLVE_NE, SOLVE_TEAM
from main import app

pytestmark = pytest.mark.integration

client = TestClient(app)


@pytest.fixture
def document():
    path = Path(__file__).parents[1] / "fixtures" / "affine_quadratic.json"
    return json.loads(path.read_text())


class TestRoutes:
    """Solve, check and mediate over HTTP"""

    def test_health(self):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "healthy"}

    def test_solve_ne_and_team(self, document):
        ne = client.post(API_PREFIX + SOLVE_NE, json={"problem": document})
        team = client.post(API_PREFIX + SOLVE_TEAM, json={"problem": document})
        assert ne.status_code == 200 and team.status_code == 200
        assert ne.json()["kind"] == "NE"
        assert team.json()["kind"] == "TeamOpt"
        assert len(team.json()["point"]) == 6

    def test_invalid_document_is_rejected(self, document):
        """Schema violations are client errors"""
        del document["team_params"]
        response = client.post(API_PREFIX + SOLVE_NE, json={"problem": document})
        assert response.status_code == 422

    def test_member_parameter_mismatch(self, document):
        document["member_params"][0]["alpha"] = [1.0, 2.0]
        response = client.post(API_PREFIX + SOLVE_NE, json={"problem": document})
        assert response.status_code == 422

    def test_check(self, document):
        response = client.post(API_PREFIX + CHECK, json={"problem": document})
        assert response.status_code == 200
        assert response.json()["cr"] in (0, 1)

    def test_mediate_reports_trace(self, document):
        payload = {"problem": document, "scenario": "gamma", "max_outer_iter": 3}
        response = client.post(API_PREFIX + MEDIATE, json=payload)
        assert response.status_code == 200
        body = response.json()
        assert len(body["psi_trace"]) == body["outer_iterations"] + 1
