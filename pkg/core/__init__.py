# PHS Lab Core Module
# Contains the port-Hamiltonian library, bundled experiments and the benchmark CLI
