"""Certified weak convergence of atomic measures on compact carriers.

The package builds up from compact carriers (finite metric spaces and
unit cubes) through finite atomic measures, bounded continuous test
functions, paranormed target spaces with Schauder bases, certified
integration, and finally convergence certification: an exact
bounded-Lipschitz oracle cross-checked against batteries of scalar and
vector-valued test functions on labeled measure sequences.
"""

from .errors import CapacityError, DomainError, UnsupportedError
from .carrier import (CompactSpace, MeasurableSet, Partition, ball_set, box_set,
                      finite_space, grid_partition, metric_axioms_report,
                      point_set, space_from_json, trivial_partition, unit_cube)
from .funcs import (Clamp, Const, Coord, DistTo, Form, McShane, Scale, Step,
                    Sum, Tent, VectorFunction, form_from_json, validate_metadata,
                    vector_function)
from .target import (SchauderBase, TargetSpace, banach_space,
                     base_continuity_probe, base_criterion_report,
                     convergence_equivalence_report, coordinate_functional,
                     cumulative_l1_space, expand, gap_value, omega_space,
                     paranorm, paranorm_axioms_report, reconstruct, seminorm,
                     target_from_json)
from .measure import (BLResult, FamilyLabel, FiniteMeasure, MeasureFamily,
                      RandomElement, bl_distance, dirac, finite_measure,
                      measure_from_json, measure_of, normalize, point_from_json,
                      pushforward, scenario, tightness_witness)
from .integral import (IntegralCertificate, IntegrabilityReport, SimpleFunction,
                       approximate_by_simple, as_vector_function, atomic_oracle,
                       continuity_integrability_harness, integrability_report,
                       integrate, integrate_simple)
from .convergence import (Battery, BatterySpec, DistributionReport,
                          EquivalenceReport, ScalarMember, Status, VectorMember,
                          Verdict, bl_witness_function, certify,
                          distribution_convergence_report, equivalence_report,
                          expectation, generate_battery, integral_gap)
from .suite import (AgreementReport, SelftestReport, bundled_suite,
                    scenario_agreement, selftest, suite_spaces, suite_targets)

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "DomainError", "UnsupportedError",
    "CompactSpace", "MeasurableSet", "Partition", "ball_set", "box_set",
    "finite_space", "grid_partition", "metric_axioms_report", "point_set",
    "space_from_json", "trivial_partition", "unit_cube",
    "Clamp", "Const", "Coord", "DistTo", "Form", "McShane", "Scale", "Step",
    "Sum", "Tent", "VectorFunction", "form_from_json", "validate_metadata",
    "vector_function",
    "SchauderBase", "TargetSpace", "banach_space", "base_continuity_probe",
    "base_criterion_report", "convergence_equivalence_report",
    "coordinate_functional", "cumulative_l1_space", "expand", "gap_value",
    "omega_space", "paranorm", "paranorm_axioms_report", "reconstruct",
    "seminorm", "target_from_json",
    "BLResult", "FamilyLabel", "FiniteMeasure", "MeasureFamily",
    "RandomElement", "bl_distance", "dirac", "finite_measure",
    "measure_from_json", "measure_of", "normalize", "point_from_json",
    "pushforward", "scenario", "tightness_witness",
    "IntegralCertificate", "IntegrabilityReport", "SimpleFunction",
    "approximate_by_simple", "as_vector_function", "atomic_oracle",
    "continuity_integrability_harness", "integrability_report", "integrate",
    "integrate_simple",
    "Battery", "BatterySpec", "DistributionReport", "EquivalenceReport",
    "ScalarMember", "Status", "VectorMember", "Verdict",
    "bl_witness_function", "certify", "distribution_convergence_report",
    "equivalence_report", "expectation", "generate_battery", "integral_gap",
    "AgreementReport", "SelftestReport", "bundled_suite", "scenario_agreement",
    "selftest", "suite_spaces", "suite_targets",
]
