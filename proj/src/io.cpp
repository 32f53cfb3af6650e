#include "fapsm/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>
#include <system_error>

#include "fapsm/errors.hpp"
#include "fapsm/format.hpp"

namespace fapsm::io {

namespace {

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(Errc::parse_failure, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Splits "magic version k=v k=v ..." and checks the magic/version pair.
std::map<std::string, std::string> parse_header(const std::string& line, std::string_view magic) {
  std::istringstream ss(line);
  std::string tag, version;
  ss >> tag >> version;
  if (tag != magic) throw Error(Errc::version_mismatch, "expected a '" + std::string(magic) + "' header");
  if (version != "v1")
    throw Error(Errc::version_mismatch, std::string(magic) + ": unsupported version '" + version + "'");
  std::map<std::string, std::string> fields;
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) parse_error(1, "malformed header field '" + tok + "'");
    fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return fields;
}

const std::string& header_field(const std::map<std::string, std::string>& fields, const std::string& key) {
  auto it = fields.find(key);
  if (it == fields.end()) parse_error(1, "header is missing '" + key + "'");
  return it->second;
}

double header_double(const std::map<std::string, std::string>& fields, const std::string& key) {
  auto v = parse_double(header_field(fields, key));
  if (!v) parse_error(1, "header field '" + key + "' is not a number");
  return *v;
}

Index header_index(const std::map<std::string, std::string>& fields, const std::string& key) {
  auto v = parse_int(header_field(fields, key));
  if (!v || *v < 0) parse_error(1, "header field '" + key + "' is not a non-negative integer");
  return Index(*v);
}

std::string read_header(std::istream& is, std::string_view what) {
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::parse_failure, std::string(what) + ": empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

template <typename Row>
void write_row(std::ostream& os, const Row& row) {
  for (Index j = 0; j < row.size(); ++j) {
    if (j) os << ',';
    os << format_number(double(row(j)));
  }
  os << '\n';
}

Eigen::RowVectorXd read_row(std::istream& is, Index expected, int line_no) {
  std::string line;
  if (!std::getline(is, line)) parse_error(line_no, "unexpected end of file");
  const auto fields = split(trim(line), ',');
  if (Index(fields.size()) != expected)
    parse_error(line_no, "expected " + std::to_string(expected) + " values, got " + std::to_string(fields.size()));
  Eigen::RowVectorXd row(expected);
  for (Index j = 0; j < expected; ++j) {
    auto v = parse_double(fields[std::size_t(j)]);
    if (!v || !std::isfinite(*v)) parse_error(line_no, "bad number '" + std::string(fields[std::size_t(j)]) + "'");
    row[j] = *v;
  }
  return row;
}

void expect_end(std::istream& is, int line_no) {
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (!trim(line).empty()) parse_error(line_no, "unexpected trailing content");
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open '" + path.string() + "' for reading");
  return in;
}

// Prefixes parse errors with the file name.
template <typename F>
auto with_path(const std::filesystem::path& path, F&& f) {
  auto in = open_input(path);
  try {
    return f(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace

void write_signature_store(std::ostream& os, Index feature_dim, Index patch_count,
                           const std::vector<SignatureRecord>& records) {
  os << "fapsm-sig v1 b=" << feature_dim << " m=" << patch_count << '\n';
  for (const auto& rec : records) {
    const auto& sig = rec.signature;
    if (sig.feature_dim() != feature_dim || sig.patch_count() != patch_count)
      throw Error(Errc::dimension_mismatch, "signature store: record dimensions differ from header");
    os << rec.identity << '|';
    for (Index j = 0; j < patch_count; ++j) os << (j ? "," : "") << int(sig.occlusion()[j]);
    for (Index j = 0; j < patch_count; ++j) {
      os << '|';
      for (Index i = 0; i < feature_dim; ++i) {
        if (i) os << ',';
        os << format_number(sig.features()(i, j));
      }
    }
    os << '\n';
  }
}

std::vector<SignatureRecord> read_signature_store(std::istream& is) {
  const auto fields = parse_header(read_header(is, "signature store"), "fapsm-sig");
  const Index b = header_index(fields, "b");
  const Index m = header_index(fields, "m");
  if (b < 1 || m < 1) parse_error(1, "b and m must be >= 1");

  std::vector<SignatureRecord> records;
  std::string line;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto parts = split(text, '|');
    if (Index(parts.size()) != m + 2)
      parse_error(line_no, "expected " + std::to_string(m + 2) + " '|' fields, got " + std::to_string(parts.size()));
    const auto id = parse_int(parts[0]);
    if (!id) parse_error(line_no, "bad identity '" + std::string(parts[0]) + "'");

    const auto flags = split(parts[1], ',');
    if (Index(flags.size()) != m) parse_error(line_no, "occlusion encoding needs " + std::to_string(m) + " flags");
    OcclusionMask occlusion(m);
    for (Index j = 0; j < m; ++j) {
      const auto f = trim(flags[std::size_t(j)]);
      if (f != "0" && f != "1") parse_error(line_no, "occlusion flag must be 0 or 1");
      occlusion[j] = f == "1" ? 1 : 0;
    }

    Eigen::MatrixXd features(b, m);
    for (Index j = 0; j < m; ++j) {
      const auto values = split(parts[std::size_t(j + 2)], ',');
      if (Index(values.size()) != b)
        parse_error(line_no, "patch " + std::to_string(j + 1) + " has " + std::to_string(values.size()) +
                                 " features, expected " + std::to_string(b));
      for (Index i = 0; i < b; ++i) {
        const auto v = parse_double(values[std::size_t(i)]);
        if (!v) parse_error(line_no, "bad feature value '" + std::string(values[std::size_t(i)]) + "'");
        features(i, j) = *v;
      }
    }
    try {
      records.push_back({*id, Signature(std::move(features), std::move(occlusion))});
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_gallery(std::ostream& os, const Gallery& gallery) {
  std::vector<SignatureRecord> records;
  records.reserve(gallery.size());
  for (const auto& e : gallery.entries()) records.push_back({e.identity, e.signature});
  write_signature_store(os, gallery.feature_dim(), gallery.patch_count(), records);
}

void write_probes(std::ostream& os, const ProbeSet& probes) {
  if (probes.size() == 0) throw Error(Errc::invalid_argument, "cannot store an empty probe set");
  std::vector<SignatureRecord> records;
  records.reserve(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i)
    records.push_back({probes.labeled() ? (*probes.identities())[i] : kRejected, probes[i]});
  write_signature_store(os, probes[0].feature_dim(), probes[0].patch_count(), records);
}

Gallery read_gallery(std::istream& is) {
  auto records = read_signature_store(is);
  std::vector<GalleryEntry<double>> entries;
  entries.reserve(records.size());
  for (auto& r : records) entries.push_back({r.identity, std::move(r.signature)});
  return Gallery(std::move(entries));
}

ProbeSet read_probes(std::istream& is) {
  auto records = read_signature_store(is);
  std::vector<Signature> samples;
  std::vector<Label> labels;
  std::size_t unlabeled = 0;
  for (auto& r : records) {
    if (r.identity == kRejected) ++unlabeled;
    else if (r.identity <= 0) throw Error(Errc::parse_failure, "probe identity " + std::to_string(r.identity) + " is invalid");
    labels.push_back(r.identity);
    samples.push_back(std::move(r.signature));
  }
  if (unlabeled == records.size()) return ProbeSet(std::move(samples));
  if (unlabeled != 0) throw Error(Errc::parse_failure, "probe store mixes labeled and unlabeled (-1) records");
  return ProbeSet(std::move(samples), std::move(labels));
}

void write_model(std::ostream& os, const AssociativeModel<double>& model) {
  model.validate();
  os << "fapsm-model v1 mode=" << to_string(model.mode) << " m=" << model.patch_count()
     << " lambda1=" << format_number(model.lambda1) << " t=" << format_number(model.threshold)
     << " kernel=" << to_string(model.kernel.kind) << " sigma=" << format_number(model.kernel.sigma)
     << " nk=" << model.support_count() << '\n';
  if (model.mode == AssociativeMode::linear) {
    for (Index i = 0; i < model.linear_weights.rows(); ++i) write_row(os, model.linear_weights.row(i));
  } else {
    for (Index i = 0; i < model.support_scores.rows(); ++i) write_row(os, model.support_scores.row(i));
    for (Index i = 0; i < model.alpha.rows(); ++i) write_row(os, model.alpha.row(i));
  }
}

AssociativeModel<double> read_model(std::istream& is) {
  const auto fields = parse_header(read_header(is, "model"), "fapsm-model");
  AssociativeModel<double> model;
  const auto& mode = header_field(fields, "mode");
  if (mode == "linear") model.mode = AssociativeMode::linear;
  else if (mode == "kernel") model.mode = AssociativeMode::kernel;
  else parse_error(1, "unknown mode '" + mode + "'");
  const auto& kind = header_field(fields, "kernel");
  if (kind == "linear") model.kernel.kind = KernelKind::linear;
  else if (kind == "gaussian") model.kernel.kind = KernelKind::gaussian;
  else parse_error(1, "unknown kernel '" + kind + "'");
  model.kernel.sigma = header_double(fields, "sigma");
  model.lambda1 = header_double(fields, "lambda1");
  model.threshold = header_double(fields, "t");
  const Index m = header_index(fields, "m");
  const Index nk = header_index(fields, "nk");
  if (m < 1) parse_error(1, "m must be >= 1");

  int line_no = 1;
  if (model.mode == AssociativeMode::linear) {
    model.linear_weights.resize(m, m);
    for (Index i = 0; i < m; ++i) model.linear_weights.row(i) = read_row(is, m, ++line_no);
  } else {
    if (nk < 1) parse_error(1, "kernel model needs nk >= 1");
    model.support_scores.resize(nk, m);
    model.alpha.resize(nk, m);
    for (Index i = 0; i < nk; ++i) model.support_scores.row(i) = read_row(is, m, ++line_no);
    for (Index i = 0; i < nk; ++i) model.alpha.row(i) = read_row(is, m, ++line_no);
  }
  expect_end(is, line_no);
  try {
    model.validate();
  } catch (const Error& e) {
    throw Error(Errc::parse_failure, std::string("model: ") + e.what());
  }
  return model;
}

void write_weights(std::ostream& os, const PatchWeights<double>& weights) {
  os << "fapsm-weights v1 m=" << weights.patch_count() << " lambda2=" << format_number(weights.lambda2) << '\n';
  write_row(os, weights.weights.transpose());
}

PatchWeights<double> read_weights(std::istream& is) {
  const auto fields = parse_header(read_header(is, "weights"), "fapsm-weights");
  const Index m = header_index(fields, "m");
  if (m < 1) parse_error(1, "m must be >= 1");
  PatchWeights<double> w;
  w.lambda2 = header_double(fields, "lambda2");
  w.weights = read_row(is, m, 2).transpose();
  expect_end(is, 2);
  if ((w.weights.array() < 0.0).any()) parse_error(2, "weights must be non-negative");
  if ((w.weights.array() > 0.0).count() == 0) parse_error(2, "at least one weight must be positive");
  return w;
}

SplitResults read_split_results(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::parse_failure, "split results: empty input");
  const auto header = split(trim(line), ',');
  if (header.size() < 3 || trim(header[0]) != "split")
    parse_error(1, "header must be 'split,<method1>,<method2>,...'");
  SplitResults out;
  for (std::size_t j = 1; j < header.size(); ++j) {
    const auto name = trim(header[j]);
    if (name.empty()) parse_error(1, "empty method name");
    out.method_names.emplace_back(name);
  }
  const Index k = Index(out.method_names.size());

  std::vector<Eigen::RowVectorXd> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (Index(fields.size()) != k + 1)
      parse_error(line_no, "expected " + std::to_string(k + 1) + " columns, got " + std::to_string(fields.size()));
    Eigen::RowVectorXd row(k);
    for (Index j = 0; j < k; ++j) {
      const auto v = parse_double(fields[std::size_t(j + 1)]);
      if (!v || !(*v >= 0.0 && *v <= 1.0))
        parse_error(line_no, "accuracy '" + std::string(fields[std::size_t(j + 1)]) + "' is not a decimal in [0, 1]");
      row[j] = *v;
    }
    rows.push_back(row);
  }
  out.accuracies.resize(Index(rows.size()), k);
  for (std::size_t i = 0; i < rows.size(); ++i) out.accuracies.row(Index(i)) = rows[i];
  out.validate();
  return out;
}

void write_split_results(std::ostream& os, const SplitResults& results) {
  os << "split";
  for (const auto& name : results.method_names) os << ',' << name;
  os << '\n';
  for (Index i = 0; i < results.split_count(); ++i) {
    os << (i + 1);
    for (Index j = 0; j < results.method_count(); ++j) os << ',' << format_number(results.accuracies(i, j));
    os << '\n';
  }
}

void write_identity_map(std::ostream& os, const IdentityMap& names) {
  os << "fapsm-names v1\n";
  for (std::size_t i = 0; i < names.size(); ++i) os << (i + 1) << ',' << names.names()[i] << '\n';
}

IdentityMap read_identity_map(std::istream& is) {
  parse_header(read_header(is, "identity map"), "fapsm-names");
  IdentityMap names;
  std::string line;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) parse_error(line_no, "expected '<id>,<name>'");
    const auto id = parse_int(std::string_view(line).substr(0, comma));
    const std::string name(trim(std::string_view(line).substr(comma + 1)));
    if (!id || name.empty() || names.find(name) || *id != Label(names.size()) + 1)
      parse_error(line_no, "identities must be listed as 1, 2, ... with unique names");
    names.intern(name);
  }
  return names;
}

std::map<std::string, ConfigEntry> read_key_values(std::istream& is) {
  std::map<std::string, ConfigEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected 'key = value'");
    const auto key = trim(text.substr(0, eq));
    if (key.empty()) parse_error(line_no, "empty key");
    out[std::string(key)] = ConfigEntry{std::string(trim(text.substr(eq + 1))), line_no};
  }
  return out;
}

Gallery load_gallery(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_gallery(in); });
}

ProbeSet load_probes(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_probes(in); });
}

AssociativeModel<double> load_model(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_model(in); });
}

PatchWeights<double> load_weights(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_weights(in); });
}

SplitResults load_split_results(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_split_results(in); });
}

std::map<std::string, ConfigEntry> load_key_values(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_key_values(in); });
}

void save_text(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_failure, "cannot open '" + path.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw Error(Errc::io_failure, "failed writing '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::io_failure, "cannot move output into '" + path.string() + "'");
  }
}

}  // namespace fapsm::io
