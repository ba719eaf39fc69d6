#pragma once

// Error types shared by every dyncopy module. //

#include <stdexcept>
#include <string>

namespace dyncopy {

/// Base class of all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Vector/matrix widths do not agree, or a container is too short.
struct shape_error : error {
    using error::error;
};

/// A numeric argument lies outside the operation's domain (e.g. non-finite input).
struct domain_error : error {
    using error::error;
};

/// An operation was applied to the wrong kind of object.
struct usage_error : error {
    using error::error;
};

/// A delayed value was requested outside the stored history.
struct history_error : error {
    using error::error;
};

/// A malformed file or configuration.
struct format_error : error {
    using error::error;
};

/// State became non-finite or exceeded the divergence bound.
struct divergence_error : error {
    divergence_error(const std::string& what, double time)
      : error{what + " (t = " + std::to_string(time) + ")"}, time{time}
    {
    }
    /// Last time at which the state was still valid.
    double time;
};

}  // namespace dyncopy
