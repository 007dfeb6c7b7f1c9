#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "nlreg/cameras.hpp"
#include "nlreg/loss.hpp"
#include "nlreg/metrics.hpp"

namespace nlreg {

/// Matrix CSV: a header line "# rows cols", then `rows` comma-separated lines of
/// `cols` values each, row-major. Values are written with 17 significant digits.
Eigen::MatrixXd load_matrix(const std::string& path);
void save_matrix(const Eigen::MatrixXd& M, const std::string& path);
Eigen::MatrixXd parse_matrix(const std::string& text);
std::string format_matrix(const Eigen::MatrixXd& M);

/// Labelled samples, one per line: d feature values then an integer class label.
/// Lines starting with '#' are ignored. Returned data is d x N.
LabeledData load_labeled_csv(const std::string& path);
void save_labeled_csv(const LabeledData& data, const std::string& path);

/// Mocap / NRSfM sequence file.
///
///   # free-form comments
///   observations          2F lines of N values (rows 2i, 2i+1: frame i's x, y)
///   visibility            optional, F lines of N 0/1 flags (default all visible)
///   ground_truth          optional, 3F lines of N values (frame i's x, y, z rows)
///   cameras               optional, F lines "w,x,y,z"
///
/// Sections may appear in any order after `observations`. Blank lines are
/// skipped. A ground_truth section with fewer than 3F rows is reported absent
/// (gt_truncated is set) and the observations still load.
struct MocapData {
  MaskedObservations W;
  std::optional<Eigen::MatrixXd> ground_truth;  // 3F x N
  std::optional<CameraSequence> cameras;
  bool gt_truncated = false;

  Eigen::Index frames() const { return W.values.rows() / 2; }
  Eigen::Index points() const { return W.values.cols(); }
};

MocapData load_mocap(const std::string& path);
MocapData parse_mocap(const std::string& text);
void save_mocap(const MocapData& data, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace nlreg
