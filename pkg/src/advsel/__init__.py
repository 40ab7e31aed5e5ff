"""Maximum selection and sorting with adversarial comparators.

Comparators answer correctly when two values are more than a threshold apart
and arbitrarily (adversarially) otherwise. This package provides the
comparator model, non-adaptive tournament-graph and adaptive adversaries
including the classic hard constructions, selection and sorting algorithms
with their approximation guarantees, a Scheffe-test density-estimation
selector built on quick-select, and a Monte-Carlo harness that checks the
query-complexity and error bounds empirically.
"""

from .core import (Instance, InvalidQueryError, QueryLog, QueryRecord, RngSeed,
                   forced_winner, is_t_approx, is_t_sorted, validate_log)
from .adversary import (AdversaryProtocolError, ComparatorSession, MemoizedStrategy,
                        PivotKiller, TournamentGraph, adversary_from_spec,
                        build_nonadaptive, komod_hard_instance,
                        lemma_one_construction, lemma_two_construction,
                        sequential_hard_instance)
from .algorithms import (CombParams, KoModParams, SelectionResult,
                         combined_select, complete_tournament, knockout_round,
                         modified_knockout, quick_select, quickselect_round,
                         sequential_select)
from .sorting import SortResult, complete_sort, exact_expected_queries, quick_sort
from .scheffe import (DiscreteDistribution, SampleSet, ScheffeOutcome,
                      ScheffeSelection, l1_distance, sample,
                      scheffe_quickselect, scheffe_test, scheffe_tournament)
from .harness import TrialConfig, TrialSummary, check_concentration, estimate
from .report import bound_report

__version__ = "0.1.0"
