# Solvers, certificates and mediation for parameterized team problems
