#pragma once

#include <stdexcept>
#include <string>

namespace ww2d {

/// Bad grid size, bad solver parameters, malformed experiment spec.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// min |1 + W_alpha| fell below the corner gate delta_J; rational
/// coefficient fields (Y, 1/J) are no longer trustworthy.
struct degenerate_surface_error : std::runtime_error {
  explicit degenerate_surface_error(const std::string& what) : std::runtime_error(what) {}
};

/// A field violated the negative-spectrum (holomorphy) tolerance.
struct holomorphy_error : std::runtime_error {
  explicit holomorphy_error(const std::string& what) : std::runtime_error(what) {}
};

/// An operation requiring a mean-free input received one with a mean
/// (e.g. inverting d/dalpha, |D|^s with s < 0).
struct mean_mode_error : std::runtime_error {
  explicit mean_mode_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ww2d
