#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace osmroad {

enum class Errc {
  malformed_xml,
  empty_extract,
  out_of_band,
  zone_mismatch,
  empty_index,
  degenerate_segment,
  unknown_node,
  unknown_way,
  no_intersection_ahead,
  coincident_points,
  missing_next_node,
  length_mismatch,
  degenerate_projection,
  k_too_large,
  shape_mismatch,
  rect_out_of_bounds,
  degenerate_gmm,
  no_lane_found,
  truncated_scan,
  bad_weights,
  missing_gt,
  io_error,
  config_error,
  invalid_argument,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::malformed_xml: return "MalformedXml";
    case Errc::empty_extract: return "EmptyExtract";
    case Errc::out_of_band: return "OutOfBand";
    case Errc::zone_mismatch: return "ZoneMismatch";
    case Errc::empty_index: return "EmptyIndex";
    case Errc::degenerate_segment: return "DegenerateSegment";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::unknown_way: return "UnknownWay";
    case Errc::no_intersection_ahead: return "NoIntersectionAhead";
    case Errc::coincident_points: return "CoincidentPoints";
    case Errc::missing_next_node: return "MissingNextNode";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::degenerate_projection: return "DegenerateProjection";
    case Errc::k_too_large: return "KTooLarge";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::rect_out_of_bounds: return "RectOutOfBounds";
    case Errc::degenerate_gmm: return "DegenerateGmm";
    case Errc::no_lane_found: return "NoLaneFound";
    case Errc::truncated_scan: return "TruncatedScan";
    case Errc::bad_weights: return "BadWeights";
    case Errc::missing_gt: return "MissingGt";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace osmroad
