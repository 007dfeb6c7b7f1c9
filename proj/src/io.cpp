#include "nlreg/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "nlreg/error.hpp"

namespace nlreg {

namespace {

struct Line {
  int number;
  std::string_view text;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  int number = 1;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto stop = end == std::string::npos ? text.size() : end;
    lines.push_back({number++, trim(std::string_view(text).substr(pos, stop - pos))});
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return lines;
}

double parse_double(std::string_view field, int line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError("not a number: '" + std::string(field) + "'", line);
  return v;
}

std::vector<double> parse_row(const Line& line) {
  std::vector<double> out;
  std::size_t pos = 0;
  const std::string_view s = line.text;
  while (true) {
    const auto comma = s.find(',', pos);
    out.push_back(parse_double(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos),
                               line.number));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void append_row(std::string& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (j) out += ',';
    out += format_double(row(j));
  }
  out += '\n';
}

bool is_section(std::string_view s) {
  return s == "observations" || s == "visibility" || s == "ground_truth" || s == "cameras";
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && lines[i].text.empty()) ++i;
  if (i == lines.size()) throw ParseError("empty matrix file", 0);

  const Line& header = lines[i];
  long rows = -1, cols = -1;
  {
    std::istringstream hs{std::string(header.text)};
    std::string hash;
    if (!(hs >> hash >> rows >> cols) || hash != "#" || rows < 0 || cols < 0)
      throw ParseError("expected header '# rows cols'", header.number);
    std::string extra;
    if (hs >> extra) throw ParseError("trailing text after matrix header", header.number);
  }
  ++i;

  Eigen::MatrixXd M(rows, cols);
  long r = 0;
  for (; i < lines.size(); ++i) {
    if (lines[i].text.empty()) continue;
    if (r == rows) throw ParseError("more rows than the header declares", lines[i].number);
    const auto row = parse_row(lines[i]);
    if (static_cast<long>(row.size()) != cols)
      throw ParseError("expected " + std::to_string(cols) + " values, found " +
                           std::to_string(row.size()),
                       lines[i].number);
    for (long c = 0; c < cols; ++c) M(r, c) = row[static_cast<std::size_t>(c)];
    ++r;
  }
  if (r != rows)
    throw ParseError("expected " + std::to_string(rows) + " rows, found " + std::to_string(r),
                     lines.back().number);
  return M;
}

std::string format_matrix(const Eigen::MatrixXd& M) {
  std::string out = "# " + std::to_string(M.rows()) + " " + std::to_string(M.cols()) + "\n";
  for (Eigen::Index r = 0; r < M.rows(); ++r) append_row(out, M.row(r));
  return out;
}

Eigen::MatrixXd load_matrix(const std::string& path) { return parse_matrix(read_file(path)); }

void save_matrix(const Eigen::MatrixXd& M, const std::string& path) {
  write_file(path, format_matrix(M));
}

LabeledData load_labeled_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t width = 0;
  for (const Line& line : split_lines(text)) {
    if (line.text.empty() || line.text.front() == '#') continue;
    auto row = parse_row(line);
    if (row.size() < 2) throw ParseError("need at least one feature and a label", line.number);
    if (width == 0) width = row.size();
    if (row.size() != width) throw ParseError("ragged row", line.number);
    const double label = row.back();
    if (label != std::floor(label)) throw ParseError("label is not an integer", line.number);
    labels.push_back(static_cast<int>(label));
    row.pop_back();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no samples in '" + path + "'", 0);
  LabeledData out;
  out.data.resize(static_cast<Eigen::Index>(width - 1), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i + 1 < width; ++i)
      out.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
  out.labels = std::move(labels);
  return out;
}

void save_labeled_csv(const LabeledData& data, const std::string& path) {
  data.validate();
  std::string out = "# " + std::to_string(data.data.cols()) + " samples, " +
                    std::to_string(data.data.rows()) + " features, label last\n";
  for (Eigen::Index j = 0; j < data.data.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.data.rows(); ++i) out += format_double(data.data(i, j)) + ',';
    out += std::to_string(data.labels[static_cast<std::size_t>(j)]) + '\n';
  }
  write_file(path, out);
}

MocapData parse_mocap(const std::string& text) {
  const auto lines = split_lines(text);
  std::vector<std::pair<std::string, std::vector<Line>>> sections;
  for (const Line& line : lines) {
    if (line.text.empty() || line.text.front() == '#') continue;
    if (is_section(line.text)) {
      for (const auto& s : sections)
        if (s.first == line.text)
          throw ParseError("duplicate section '" + std::string(line.text) + "'", line.number);
      sections.emplace_back(std::string(line.text), std::vector<Line>{});
      continue;
    }
    if (sections.empty()) throw ParseError("data before the 'observations' section", line.number);
    sections.back().second.push_back(line);
  }
  if (sections.empty() || sections.front().first != "observations")
    throw ParseError("mocap file must start with an 'observations' section", 0);

  auto read_block = [](const std::vector<Line>& rows, Eigen::Index width) {
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), width);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto vals = parse_row(rows[r]);
      if (static_cast<Eigen::Index>(vals.size()) != width)
        throw ParseError("expected " + std::to_string(width) + " values, found " +
                             std::to_string(vals.size()),
                         rows[r].number);
      for (Eigen::Index c = 0; c < width; ++c)
        M(static_cast<Eigen::Index>(r), c) = vals[static_cast<std::size_t>(c)];
    }
    return M;
  };

  const auto& obs = sections.front().second;
  if (obs.empty()) throw ParseError("empty observations section", 0);
  if (obs.size() % 2 != 0)
    throw ParseError("observations need two rows per frame", obs.back().number);
  const Eigen::Index N = static_cast<Eigen::Index>(parse_row(obs.front()).size());
  const Eigen::Index F = static_cast<Eigen::Index>(obs.size() / 2);

  MocapData out;
  out.W.values = read_block(obs, N);
  out.W.mask = MaskMatrix::Constant(2 * F, N, true);

  for (std::size_t s = 1; s < sections.size(); ++s) {
    const auto& [name, rows] = sections[s];
    if (name == "visibility") {
      if (static_cast<Eigen::Index>(rows.size()) != F)
        throw ParseError("visibility needs one row per frame",
                         rows.empty() ? 0 : rows.back().number);
      const Eigen::MatrixXd vis = read_block(rows, N);
      for (Eigen::Index f = 0; f < F; ++f)
        for (Eigen::Index j = 0; j < N; ++j) {
          const double v = vis(f, j);
          if (v != 0.0 && v != 1.0)
            throw ParseError("visibility flags must be 0 or 1", rows[static_cast<std::size_t>(f)].number);
          out.W.mask(2 * f, j) = v == 1.0;
          out.W.mask(2 * f + 1, j) = v == 1.0;
        }
    } else if (name == "ground_truth") {
      if (static_cast<Eigen::Index>(rows.size()) < 3 * F) {
        out.gt_truncated = true;
        continue;
      }
      if (static_cast<Eigen::Index>(rows.size()) > 3 * F)
        throw ParseError("ground_truth has more than 3F rows", rows.back().number);
      out.ground_truth = read_block(rows, N);
    } else if (name == "cameras") {
      if (static_cast<Eigen::Index>(rows.size()) != F)
        throw ParseError("cameras need one quaternion per frame",
                         rows.empty() ? 0 : rows.back().number);
      const Eigen::MatrixXd q = read_block(rows, 4);
      std::vector<Eigen::Vector4d> quats;
      for (Eigen::Index f = 0; f < F; ++f) quats.emplace_back(q.row(f).transpose());
      out.cameras = CameraSequence::from_quaternions(std::move(quats));
    }
  }
  return out;
}

MocapData load_mocap(const std::string& path) { return parse_mocap(read_file(path)); }

void save_mocap(const MocapData& data, const std::string& path) {
  data.W.validate();
  const Eigen::Index F = data.frames(), N = data.points();
  std::string out = "# " + std::to_string(F) + " frames, " + std::to_string(N) +
                    " points; shapes are 3F x N (frame-major x, y, z rows)\n";
  out += "observations\n";
  const Eigen::MatrixXd obs = data.W.mask.select(data.W.values, 0.0);
  for (Eigen::Index r = 0; r < obs.rows(); ++r) append_row(out, obs.row(r));
  if (!data.W.mask.all()) {
    out += "visibility\n";
    for (Eigen::Index f = 0; f < F; ++f) {
      Eigen::RowVectorXd vis(N);
      for (Eigen::Index j = 0; j < N; ++j) vis(j) = data.W.mask(2 * f, j) ? 1.0 : 0.0;
      append_row(out, vis);
    }
  }
  if (data.ground_truth) {
    out += "ground_truth\n";
    for (Eigen::Index r = 0; r < data.ground_truth->rows(); ++r)
      append_row(out, data.ground_truth->row(r));
  }
  if (data.cameras) {
    out += "cameras\n";
    for (const auto& q : data.cameras->quaternions) append_row(out, q.transpose());
  }
  write_file(path, out);
}

}  // namespace nlreg
