#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onom/matrix.hpp"

namespace onom {

/// Quote-aware CSV/TSV splitting ("" escapes a quote inside quoted fields).
std::vector<std::vector<std::string>> parse_delimited(std::string_view content, char delimiter);

/// Behavioral-profile table: one row per ID tag, one column per word.
struct ProfileTable {
  std::vector<std::pair<std::string, std::string>> rows;  // (tag_type, id_tag)
  std::vector<std::string> columns;
  Matrix values;

  std::string row_label(std::size_t i) const { return rows[i].first + ": " + rows[i].second; }
  /// Throws onom::Error unless values are finite, non-negative, at least
  /// 2 x 2, with no all-zero row or column.
  void validate() const;
};

/// CSV with header "tag_type,id_tag,<word1>,<word2>,...".
ProfileTable parse_profile_table(std::string_view csv);
ProfileTable load_profile_table(const std::filesystem::path& path);

struct SvdResult {
  Matrix u;  // m x r
  Vector s;  // descending
  Matrix v;  // n x r
};

/// Thin SVD by one-sided Jacobi rotations.
SvdResult jacobi_svd(const Matrix& a);

struct CaResult {
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  Vector row_mass;
  Vector col_mass;
  Vector sigma;  // positive singular values only (>= 1e-12), descending
  Matrix row_standard;
  Matrix row_principal;
  Matrix col_standard;
  Matrix col_principal;
  Vector inertia_share;
  double total_inertia = 0.0;
  Matrix residuals;  // D_r^-1/2 (P - r c^T) D_c^-1/2

  std::size_t dims() const { return static_cast<std::size_t>(sigma.size()); }
};

/// Simple correspondence analysis. Each singular vector pair is signed so
/// that the largest-magnitude entry of the row vector is positive.
CaResult correspondence_analysis(const ProfileTable& table);

struct InertiaRow {
  std::size_t dim;  // 1-based
  double sigma;
  double inertia;
  double share;
  double cumulative;
};

std::vector<InertiaRow> inertia_report(const CaResult& ca);
std::string inertia_report_tsv(const std::vector<InertiaRow>& report);

/// Angle in degrees [0, 360) of a row's first two standard coordinates.
double feature_angle(const CaResult& ca, std::size_t row);
/// Angle in degrees [0, 360) of a column's first two principal coordinates.
double word_angle(const CaResult& ca, std::size_t col);
/// Column whose angle is closest to the row's angle.
std::size_t nearest_word(const CaResult& ca, std::size_t row);

struct MoonStyle {
  double width = 760.0;
  double height = 760.0;
  double radius = 250.0;
  double inner_fraction = 0.6;  // words fit inside this share of the radius
  double min_pt = 8.0;
  double max_pt = 18.0;
  double word_pt = 16.0;
  double nudge_deg = 0.5;
};

struct MoonFeature {
  std::size_t row;
  std::string name;
  double angle_deg;        // before nudging
  double placed_deg;       // after nudging
  double font_pt;
};

struct MoonWord {
  std::string name;
  double x;
  double y;
};

struct MoonLayout {
  double cx;
  double cy;
  double radius;
  std::vector<MoonWord> words;
  std::vector<MoonFeature> features;  // in placed angular order
};

/// Words at their principal coordinates scaled into the inner disc; features
/// on the circle at their standard-coordinate angle with font size linear in
/// principal-coordinate norm; crowded labels pushed apart in nudge_deg steps
/// without changing their angular order.
MoonLayout moon_layout(const CaResult& ca, const MoonStyle& style = {});
std::string moon_plot_svg(const CaResult& ca, const MoonStyle& style = {});

struct FrameAnnotation {
  std::string language;
  std::string lu;
  std::string frame;
  std::string instance_id;
};

/// TSV "language<TAB>lu<TAB>frame<TAB>instance_id"; a header row with those
/// names is skipped.
std::vector<FrameAnnotation> load_annotations(const std::filesystem::path& path);
std::vector<FrameAnnotation> parse_annotations(std::string_view tsv);

struct FrameTally {
  std::vector<std::string> languages;
  std::vector<std::string> frames;
  std::map<std::string, std::size_t> totals;  // per language
  // language -> frame -> lu -> count
  std::map<std::string, std::map<std::string, std::map<std::string, std::size_t>>> counts;

  double proportion(const std::string& language, const std::string& frame,
                    const std::string& lu) const;
};

FrameTally frame_tally(std::span<const FrameAnnotation> annotations);
/// "language<TAB>frame<TAB>lu<TAB>count<TAB>proportion" rows.
std::string frame_tally_tsv(const FrameTally& tally);
/// One stacked column per language, stacked by frame and split by LU.
std::string frame_tally_svg(const FrameTally& tally, double width = 720.0, double height = 520.0);

}  // namespace onom
