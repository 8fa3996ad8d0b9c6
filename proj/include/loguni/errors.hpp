#pragma once

#include <stdexcept>
#include <string>

namespace loguni {

// Base for every engine error so callers can catch one family.
struct engine_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Interval refinement hit its cap; usually a violated independence declaration.
struct refinement_budget_exceeded : engine_error {
    using engine_error::engine_error;
};

struct precondition_violated : engine_error {
    using engine_error::engine_error;
};

// A verdict would depend on terms beyond the represented window.
struct insufficient_precision : engine_error {
    using engine_error::engine_error;
};

struct not_a_unit : engine_error {
    using engine_error::engine_error;
};

struct value_too_small : engine_error {
    using engine_error::engine_error;
};

struct equal_values : engine_error {
    using engine_error::engine_error;
};

// The finite center no longer represents the valuation faithfully.
struct degenerate_center : engine_error {
    using engine_error::engine_error;
};

struct not_dominant : engine_error {
    using engine_error::engine_error;
};

struct wedge_value_too_small : engine_error {
    using engine_error::engine_error;
};

struct not_truncated_closed : engine_error {
    using engine_error::engine_error;
};

struct non_integrable_block : engine_error {
    using engine_error::engine_error;
};

struct not_closed : engine_error {
    using engine_error::engine_error;
};

struct empty_polygon : engine_error {
    using engine_error::engine_error;
};

struct already_contained : engine_error {
    using engine_error::engine_error;
};

struct too_many_dependents : engine_error {
    using engine_error::engine_error;
};

struct not_prepared : engine_error {
    using engine_error::engine_error;
};

// A loop exceeded its computed cap; carries the trace context upstream.
struct iteration_limit : engine_error {
    using engine_error::engine_error;
};

struct recursion_failure : engine_error {
    using engine_error::engine_error;
};

struct progress_assertion_failed : engine_error {
    using engine_error::engine_error;
};

// A case the underlying theory excludes was reached: engine bug.
struct impossible_branch : engine_error {
    using engine_error::engine_error;
};

struct integrability_violation : engine_error {
    using engine_error::engine_error;
};

struct malformed_input : engine_error {
    using engine_error::engine_error;
};

} // namespace loguni
