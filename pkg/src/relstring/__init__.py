"""Closed relativistic strings: exact evolution and singularity analysis.

Submodules:
    periodic     spectral representation of periodic functions and lifts
    curves       orthogonal-gauge initial data and the null-angle encoding
    gauge        conversion of arbitrary parametrizations into the gauge
    evolution    exact worldsheet evolution and slice extraction
    singularity  detection, classification, tracking, local motion models
    bounds       timelikeness index and guaranteed-existence certificates
    curved       reduced system and blow-up monitoring in vacuum backgrounds
    r3           space curves whose zero-velocity cylinder stays regular
    presets      built-in exact-solution families
    serialize    canonical JSON/CSV formats
    cli          command-line front end
"""

__version__ = "0.1.0"
