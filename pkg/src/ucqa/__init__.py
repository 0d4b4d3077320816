"""Repairs and consistent query answers under universal constraints."""
from .core import (Fact, Literal, ModelError, QAnd, QAtom, QConst, QNot, QOr, Schema,
                   UniversalConstraint, UnsupportedConstraintError, canonical, closer_than,
                   eval_query, make_fd, make_jd, satisfies, symmetric_difference)
from .parser import (ParseError, parse_constraint, parse_constraints, parse_instance,
                     parse_query, parse_schema, serialize)
from .grounding import (ConflictHypergraph, GroundRule, Grounding, build_hypergraph,
                        complement, compute_hull, ground_rules, is_maximal_independent)
from .consequence import closure_of
from .repair import (RepairStrategy, check_repair, construct_repair, denial_repair,
                     guided_repair, is_repair)
from .cqa import (CQAEngine, compute_blocks, compute_supports, cqa, dependency_graph,
                  exists_repair, merge_jds)

__all__ = [name for name in dir() if not name.startswith("_")]
