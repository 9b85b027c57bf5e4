#pragma once

#include <stdexcept>
#include <string>

namespace impact {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Access to a bank outside the caller's partition (raised under MPR).
struct PartitionViolation : SimError {
    using SimError::SimError;
};

// RowClone mask selects a bank not covered by the operand ranges.
struct MaskRangeMismatch : SimError {
    using SimError::SimError;
};

// Hit/conflict latency distributions overlap; no threshold exists.
struct CalibrationFailed : SimError {
    using SimError::SimError;
};

// Semaphore/barrier protocol violated inside the event loop.
struct SyncDeadlock : SimError {
    using SimError::SimError;
};

// Hash-table entry size does not divide the DRAM row size.
struct SizeMismatch : SimError {
    using SimError::SimError;
};

struct InvalidConfig : SimError {
    using SimError::SimError;
};

struct ConfigParseError : SimError {
    using SimError::SimError;
};

} // namespace impact
