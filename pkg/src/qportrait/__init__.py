"""Phase portraits, projective measurement and multiqubit tomography for finite quantum systems."""

from . import composite, measurement, multiqubit, numkernel, qudit
from .composite import (
    BipartiteLayout,
    EntanglementClass,
    TransformClass,
    classify_entanglement,
    classify_transform,
    pair_coefficients,
)
from .errors import NumericalPreconditionError, QPortraitError, ValidationError
from .measurement import (
    FrequencyTable,
    MeasurementRecord,
    measure_act,
    measure_series,
    measurement_entropy,
    reduced_density,
    reduction_measure,
)
from .multiqubit import (
    CounterConfiguration,
    PauliCoefficients,
    classify_multiqubit_transform,
    counter_distribution,
    effective_director,
    max_entangling_unitary,
    pauli_coefficients,
    projector_from_bits,
    reconstruct_state,
)
from .qudit import (
    DensityMatrix,
    Observable,
    PureState,
    ResolutionOfIdentity,
    portrait_distribution,
    resolution_of_identity,
)

__version__ = "0.1.0"

__all__ = [
    "NumericalPreconditionError",
    "QPortraitError",
    "ValidationError",
    "composite",
    "measurement",
    "multiqubit",
    "numkernel",
    "qudit",
    "BipartiteLayout",
    "EntanglementClass",
    "TransformClass",
    "classify_entanglement",
    "classify_transform",
    "pair_coefficients",
    "FrequencyTable",
    "MeasurementRecord",
    "measure_act",
    "measure_series",
    "measurement_entropy",
    "reduced_density",
    "reduction_measure",
    "CounterConfiguration",
    "PauliCoefficients",
    "classify_multiqubit_transform",
    "counter_distribution",
    "effective_director",
    "max_entangling_unitary",
    "pauli_coefficients",
    "projector_from_bits",
    "reconstruct_state",
    "DensityMatrix",
    "Observable",
    "PureState",
    "ResolutionOfIdentity",
    "portrait_distribution",
    "resolution_of_identity",
]
