#pragma once

#include <stdexcept>
#include <string>

namespace qhgeo {

enum class ErrorCode {
    MalformedSpec,
    PointOutsideDomain,
    NodeBudgetExceeded,
    DisconnectedGraph,
    UnreachableNode,
    DegeneratePair,
    EmptyPath,
    NonpositiveEpsilon,
    TooFewPairs,
    TooFewPoints,
    AnchorApproachFailure,
    UnmatchedWaypoint,
    InputConstraintViolation,
    EtaInversionFailure,
    PreconditionViolation,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedSpec: return "malformed-spec";
        case ErrorCode::PointOutsideDomain: return "point-outside-domain";
        case ErrorCode::NodeBudgetExceeded: return "node-budget-exceeded";
        case ErrorCode::DisconnectedGraph: return "disconnected-graph";
        case ErrorCode::UnreachableNode: return "unreachable-node";
        case ErrorCode::DegeneratePair: return "degenerate-pair";
        case ErrorCode::EmptyPath: return "empty-path";
        case ErrorCode::NonpositiveEpsilon: return "nonpositive-epsilon";
        case ErrorCode::TooFewPairs: return "too-few-pairs";
        case ErrorCode::TooFewPoints: return "too-few-points";
        case ErrorCode::AnchorApproachFailure: return "anchor-approach-failure";
        case ErrorCode::UnmatchedWaypoint: return "unmatched-waypoint";
        case ErrorCode::InputConstraintViolation: return "input-constraint-violation";
        case ErrorCode::EtaInversionFailure: return "eta-inversion-failure";
        case ErrorCode::PreconditionViolation: return "precondition-violation";
    }
    return "unknown-error";
}

}  // namespace qhgeo
