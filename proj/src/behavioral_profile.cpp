#include "onom/behavioral_profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "onom/error.hpp"
#include "onom/svg.hpp"

namespace onom {

namespace {

constexpr double kSigmaFloor = 1e-12;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_number(const std::string& s, std::size_t line, std::size_t col) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("line " + std::to_string(line) + ", column " + std::to_string(col) +
                ": not a number: '" + s + "'");
  }
}

double normalize_deg(double d) {
  d = std::fmod(d, 360.0);
  return d < 0.0 ? d + 360.0 : d;
}

double angular_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

double coord(const Matrix& m, std::size_t i, Eigen::Index k) {
  return k < m.cols() ? m(static_cast<Eigen::Index>(i), k) : 0.0;
}

}  // namespace

std::vector<std::vector<std::string>> parse_delimited(std::string_view content, char delimiter) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = any = true;
    } else if (c == delimiter) {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error("unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void ProfileTable::validate() const {
  if (values.rows() < 2 || values.cols() < 2) throw Error("profile table needs at least 2 rows and 2 columns");
  if (static_cast<std::size_t>(values.rows()) != rows.size() ||
      static_cast<std::size_t>(values.cols()) != columns.size()) {
    throw Error("profile table labels do not match its values");
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (!std::isfinite(values(i, j)) || values(i, j) < 0.0) {
        throw Error("negative or non-finite value in row '" + row_label(static_cast<std::size_t>(i)) + "'");
      }
    }
    if (values.row(i).sum() == 0.0) throw Error("all-zero row '" + row_label(static_cast<std::size_t>(i)) + "'");
  }
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    if (values.col(j).sum() == 0.0) throw Error("all-zero column '" + columns[static_cast<std::size_t>(j)] + "'");
  }
}

ProfileTable parse_profile_table(std::string_view csv) {
  const auto lines = parse_delimited(csv, ',');
  if (lines.empty()) throw Error("empty profile table");
  const auto& header = lines.front();
  if (header.size() < 4 || header[0] != "tag_type" || header[1] != "id_tag") {
    throw Error("profile header must be tag_type,id_tag,<word>,<word>,...");
  }
  ProfileTable t;
  t.columns.assign(header.begin() + 2, header.end());
  const auto ncol = static_cast<Eigen::Index>(t.columns.size());
  t.values.resize(static_cast<Eigen::Index>(lines.size() - 1), ncol);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& line = lines[r];
    if (line.size() != header.size()) {
      throw Error("line " + std::to_string(r + 1) + ": expected " + std::to_string(header.size()) +
                  " fields, got " + std::to_string(line.size()));
    }
    t.rows.emplace_back(line[0], line[1]);
    for (Eigen::Index j = 0; j < ncol; ++j) {
      t.values(static_cast<Eigen::Index>(r - 1), j) =
          parse_number(line[static_cast<std::size_t>(j) + 2], r + 1, static_cast<std::size_t>(j) + 3);
    }
  }
  t.validate();
  return t;
}

ProfileTable load_profile_table(const std::filesystem::path& path) {
  return parse_profile_table(read_file(path));
}

SvdResult jacobi_svd(const Matrix& a) {
  if (a.rows() < a.cols()) {
    SvdResult t = jacobi_svd(a.transpose());
    return {std::move(t.v), std::move(t.s), std::move(t.u)};
  }
  const Eigen::Index m = a.rows(), n = a.cols();
  Matrix u = a;
  Matrix v = Matrix::Identity(n, n);
  const double eps = 1e-15;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = u.col(p).squaredNorm();
        const double beta = u.col(q).squaredNorm();
        const double gamma = u.col(p).dot(u.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  Vector s(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    s(j) = u.col(j).norm();
    if (s(j) > 0.0) u.col(j) /= s(j);
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return s(x) > s(y); });
  SvdResult out{Matrix(m, n), Vector(n), Matrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.u.col(j) = u.col(src);
    out.s(j) = s(src);
    out.v.col(j) = v.col(src);
  }
  return out;
}

CaResult correspondence_analysis(const ProfileTable& table) {
  table.validate();
  CaResult ca;
  for (std::size_t i = 0; i < table.rows.size(); ++i) ca.row_names.push_back(table.row_label(i));
  ca.col_names = table.columns;
  const Matrix p = table.values / table.values.sum();
  ca.row_mass = p.rowwise().sum();
  ca.col_mass = p.colwise().sum().transpose();
  const Eigen::Index nr = p.rows(), nc = p.cols();
  ca.residuals.resize(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 0; j < nc; ++j) {
      const double e = ca.row_mass(i) * ca.col_mass(j);
      ca.residuals(i, j) = (p(i, j) - e) / std::sqrt(e);
    }
  }
  ca.total_inertia = ca.residuals.squaredNorm();

  SvdResult svd = jacobi_svd(ca.residuals);
  Eigen::Index k = 0;
  while (k < svd.s.size() && svd.s(k) >= kSigmaFloor) ++k;
  ca.sigma = svd.s.head(k);
  Matrix u = svd.u.leftCols(k);
  Matrix v = svd.v.leftCols(k);
  for (Eigen::Index d = 0; d < k; ++d) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < nr; ++i) {
      if (std::abs(u(i, d)) > std::abs(u(arg, d))) arg = i;
    }
    if (u(arg, d) < 0.0) {
      u.col(d) *= -1.0;
      v.col(d) *= -1.0;
    }
  }
  ca.row_standard = ca.row_mass.cwiseSqrt().cwiseInverse().asDiagonal() * u;
  ca.col_standard = ca.col_mass.cwiseSqrt().cwiseInverse().asDiagonal() * v;
  ca.row_principal = ca.row_standard * ca.sigma.asDiagonal();
  ca.col_principal = ca.col_standard * ca.sigma.asDiagonal();
  const double kept = ca.sigma.squaredNorm();
  ca.inertia_share = kept > 0.0 ? Vector(ca.sigma.array().square() / kept) : Vector(0);
  return ca;
}

std::vector<InertiaRow> inertia_report(const CaResult& ca) {
  std::vector<InertiaRow> out;
  double cumulative = 0.0;
  for (std::size_t d = 0; d < ca.dims(); ++d) {
    const auto k = static_cast<Eigen::Index>(d);
    cumulative += ca.inertia_share(k);
    out.push_back({d + 1, ca.sigma(k), ca.sigma(k) * ca.sigma(k), ca.inertia_share(k), cumulative});
  }
  if (!out.empty()) out.back().cumulative = std::min(out.back().cumulative, 1.0);
  return out;
}

std::string inertia_report_tsv(const std::vector<InertiaRow>& report) {
  std::string out = "dim\tsigma\tinertia\tshare\tcumulative\n";
  char buf[160];
  for (const auto& r : report) {
    std::snprintf(buf, sizeof buf, "%zu\t%.10f\t%.10f\t%.10f\t%.10f\n", r.dim, r.sigma, r.inertia,
                  r.share, r.cumulative);
    out += buf;
  }
  return out;
}

double feature_angle(const CaResult& ca, std::size_t row) {
  return normalize_deg(std::atan2(coord(ca.row_standard, row, 1), coord(ca.row_standard, row, 0)) *
                       180.0 / std::numbers::pi);
}

double word_angle(const CaResult& ca, std::size_t col) {
  return normalize_deg(std::atan2(coord(ca.col_principal, col, 1), coord(ca.col_principal, col, 0)) *
                       180.0 / std::numbers::pi);
}

std::size_t nearest_word(const CaResult& ca, std::size_t row) {
  if (ca.dims() == 0) throw Error("correspondence analysis has no positive dimension");
  const double a = feature_angle(ca, row);
  std::size_t best = 0;
  for (std::size_t j = 1; j < ca.col_names.size(); ++j) {
    if (angular_gap(a, word_angle(ca, j)) < angular_gap(a, word_angle(ca, best))) best = j;
  }
  return best;
}

MoonLayout moon_layout(const CaResult& ca, const MoonStyle& style) {
  if (ca.dims() == 0) throw Error("moon plot needs at least one positive dimension");
  if (!(style.min_pt > 0.0) || style.max_pt < style.min_pt || !(style.nudge_deg > 0.0)) {
    throw Error("invalid moon plot style");
  }
  MoonLayout out{style.width / 2.0, style.height / 2.0, style.radius, {}, {}};

  double max_norm = 0.0;
  for (std::size_t j = 0; j < ca.col_names.size(); ++j) {
    max_norm = std::max(max_norm, std::hypot(coord(ca.col_principal, j, 0), coord(ca.col_principal, j, 1)));
  }
  const double scale = max_norm > 0.0 ? style.inner_fraction * style.radius / max_norm : 0.0;
  for (std::size_t j = 0; j < ca.col_names.size(); ++j) {
    out.words.push_back({ca.col_names[j], out.cx + scale * coord(ca.col_principal, j, 0),
                         out.cy - scale * coord(ca.col_principal, j, 1)});
  }

  std::vector<double> norms;
  for (std::size_t i = 0; i < ca.row_names.size(); ++i) {
    norms.push_back(std::hypot(coord(ca.row_principal, i, 0), coord(ca.row_principal, i, 1)));
  }
  const double lo = *std::min_element(norms.begin(), norms.end());
  const double hi = *std::max_element(norms.begin(), norms.end());
  for (std::size_t i = 0; i < ca.row_names.size(); ++i) {
    const double t = hi > lo ? (norms[i] - lo) / (hi - lo) : 1.0;
    const double angle = feature_angle(ca, i);
    out.features.push_back({i, ca.row_names[i], angle, angle, style.min_pt + t * (style.max_pt - style.min_pt)});
  }
  std::stable_sort(out.features.begin(), out.features.end(),
                   [](const MoonFeature& a, const MoonFeature& b) { return a.angle_deg < b.angle_deg; });
  // Each label needs roughly its text height of arc next to its neighbour.
  for (std::size_t i = 1; i < out.features.size(); ++i) {
    auto& prev = out.features[i - 1];
    auto& cur = out.features[i];
    const double need = 0.5 * (prev.font_pt + cur.font_pt) / style.radius * 180.0 / std::numbers::pi;
    while (cur.placed_deg < prev.placed_deg + need) cur.placed_deg += style.nudge_deg;
  }
  return out;
}

std::string moon_plot_svg(const CaResult& ca, const MoonStyle& style) {
  const MoonLayout layout = moon_layout(ca, style);
  SvgWriter svg(style.width, style.height);
  svg.rect(0, 0, style.width, style.height, "#ffffff");
  svg.circle(layout.cx, layout.cy, layout.radius, "none", "#555555", 1.0);
  svg.circle(layout.cx, layout.cy, 2.0, "#555555");
  for (const auto& f : layout.features) {
    const double rad = f.placed_deg * std::numbers::pi / 180.0;
    const double cs = std::cos(rad), sn = std::sin(rad);
    svg.line(layout.cx + layout.radius * cs, layout.cy - layout.radius * sn,
             layout.cx + (layout.radius + 5.0) * cs, layout.cy - (layout.radius + 5.0) * sn, "#555555");
    const double tx = layout.cx + (layout.radius + 8.0) * cs;
    const double ty = layout.cy - (layout.radius + 8.0) * sn + 0.35 * f.font_pt;
    const bool left = cs < 0.0;
    svg.text(tx, ty, f.name, f.font_pt, left ? "end" : "start", "#333333");
  }
  for (std::size_t j = 0; j < layout.words.size(); ++j) {
    const auto& w = layout.words[j];
    svg.circle(w.x, w.y, 3.0, palette_color(j));
    svg.text(w.x, w.y - 6.0, w.name, style.word_pt, "middle", palette_color(j));
  }
  return svg.finish();
}

std::vector<FrameAnnotation> parse_annotations(std::string_view tsv) {
  std::vector<FrameAnnotation> out;
  const auto lines = parse_delimited(tsv, '\t');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (i == 0 && l.size() == 4 && l[0] == "language" && l[1] == "lu" && l[2] == "frame") continue;
    if (l.size() != 4) {
      throw Error("annotation line " + std::to_string(i + 1) + ": expected 4 fields, got " +
                  std::to_string(l.size()));
    }
    out.push_back({l[0], l[1], l[2], l[3]});
  }
  return out;
}

std::vector<FrameAnnotation> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_file(path));
}

double FrameTally::proportion(const std::string& language, const std::string& frame,
                              const std::string& lu) const {
  const auto t = totals.find(language);
  if (t == totals.end() || t->second == 0) return 0.0;
  const auto& by_frame = counts.at(language);
  const auto f = by_frame.find(frame);
  if (f == by_frame.end()) return 0.0;
  const auto l = f->second.find(lu);
  return l == f->second.end() ? 0.0 : static_cast<double>(l->second) / static_cast<double>(t->second);
}

FrameTally frame_tally(std::span<const FrameAnnotation> annotations) {
  if (annotations.empty()) throw Error("no annotations to tally");
  FrameTally t;
  std::set<std::string> langs, frames;
  for (const auto& a : annotations) {
    langs.insert(a.language);
    frames.insert(a.frame);
    ++t.totals[a.language];
    ++t.counts[a.language][a.frame][a.lu];
  }
  t.languages.assign(langs.begin(), langs.end());
  t.frames.assign(frames.begin(), frames.end());
  return t;
}

std::string frame_tally_tsv(const FrameTally& tally) {
  std::string out = "language\tframe\tlu\tcount\tproportion\n";
  char buf[64];
  for (const auto& [lang, by_frame] : tally.counts) {
    for (const auto& [frame, by_lu] : by_frame) {
      for (const auto& [lu, count] : by_lu) {
        std::snprintf(buf, sizeof buf, "\t%zu\t%.6f\n", count, tally.proportion(lang, frame, lu));
        out += lang + "\t" + frame + "\t" + lu + buf;
      }
    }
  }
  return out;
}

std::string frame_tally_svg(const FrameTally& tally, double width, double height) {
  SvgWriter svg(width, height);
  svg.rect(0, 0, width, height, "#ffffff");
  const double top = 30.0, bottom = height - 50.0, left = 60.0;
  const double legend_w = 200.0;
  const double plot_h = bottom - top;
  const double slot = (width - left - legend_w) / static_cast<double>(tally.languages.size());
  const double bar_w = std::min(90.0, 0.6 * slot);
  svg.line(left, bottom, width - legend_w, bottom, "#333333");
  svg.line(left, top, left, bottom, "#333333");
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = bottom - plot_h * tick / 4.0;
    svg.text(left - 6.0, y + 4.0, std::to_string(tick * 25) + "%", 10.0, "end");
  }
  for (std::size_t l = 0; l < tally.languages.size(); ++l) {
    const auto& lang = tally.languages[l];
    const double x = left + slot * (static_cast<double>(l) + 0.5) - bar_w / 2.0;
    double y = bottom;
    const auto& by_frame = tally.counts.at(lang);
    for (std::size_t f = 0; f < tally.frames.size(); ++f) {
      const auto it = by_frame.find(tally.frames[f]);
      if (it == by_frame.end()) continue;
      for (const auto& lu_count : it->second) {
        const std::string& lu = lu_count.first;
        const double p = tally.proportion(lang, tally.frames[f], lu);
        const double h = p * plot_h;
        y -= h;
        svg.rect(x, y, bar_w, h, palette_color(f), "#ffffff");
        if (h >= 14.0) {
          const long pct = std::lround(100.0 * p);
          svg.text(x + bar_w / 2.0, y + h / 2.0 + 4.0, lu + " " + std::to_string(pct) + "%", 10.0,
                   "middle", "#ffffff");
        }
      }
    }
    svg.text(x + bar_w / 2.0, bottom + 18.0, lang, 12.0, "middle");
  }
  for (std::size_t f = 0; f < tally.frames.size(); ++f) {
    const double y = top + 18.0 * static_cast<double>(f);
    svg.rect(width - legend_w + 12.0, y, 12.0, 12.0, palette_color(f));
    svg.text(width - legend_w + 30.0, y + 10.0, tally.frames[f], 11.0);
  }
  return svg.finish();
}

}  // namespace onom
