"""Modules that handle the subcommands the command line recognizes"""

SUBCOMMANDS = {
    'lp-verify': "partition of unity, reconstruction, Bernstein and Sobolev suites",
    'norm': "Besov norm of a stored field or of the configured initial density",
    'bony-verify': "Bony identity and commutator term decomposition residuals",
    'commutator-suite': "commutator estimate suites with refinement stability",
    'sk-verify': "compensating-matrix identities over random directions",
    'solve-euler': "one relaxed Euler run with diagnostics and snapshots",
    'solve-pme': "one porous medium run with diagnostics and snapshots",
    'tau-sweep': "relaxation-limit sweep with error tables and fitted orders",
    'audit-energy': "relaxation-limit sweep followed by the uniform energy audits",
}
