API_PREFIX = "/api/v1"
SOLVE_NE = "/solve-ne"
SOLVE_TEAM = "/solve-team"
CHECK = "/check"
MEDIATE = "/mediate"
