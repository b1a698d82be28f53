#pragma once

#include <stdexcept>
#include <string>

namespace tem {

// Network is not a tree rooted at the slack bus, or a bus is unreachable.
struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Load flow failed to reach the fixed point within the iteration cap.
struct PowerFlowDivergence : std::runtime_error {
    explicit PowerFlowDivergence(const std::string& msg, double residual_pu)
        : std::runtime_error(msg), residual(residual_pu) {}
    double residual;
};

// Feasibility window of the market is empty.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Balance residual grows monotonically; the step size is too large.
struct StepSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario document failed schema parsing.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario parsed but violates a structural invariant.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contract violation on an operation argument.
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace tem
