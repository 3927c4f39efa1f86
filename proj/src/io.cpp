#include "stratsurv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace stratsurv {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  while (ptr < end && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
  double v;
  if (!parse_double(s, v)) return false;
  if (v != std::floor(v)) return false;
  out = static_cast<int>(v);
  return true;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Dataset read_dataset(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset file is empty: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "time" || header[1] != "status") {
    throw std::runtime_error(
        "dataset header must start with time,status (got: " + line + ")");
  }
  const int p = static_cast<int>(header.size()) - 2;

  Dataset data;
  data.p = p;
  std::vector<int> bad_lines;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    bool ok = fields.size() == header.size();
    double time = 0.0;
    int status = 0;
    std::vector<double> x(p);
    if (ok) ok = parse_double(fields[0], time) && time > 0.0;
    if (ok) ok = parse_int(fields[1], status) && (status == 0 || status == 1);
    for (int l = 0; ok && l < p; ++l) ok = parse_double(fields[2 + l], x[l]);
    if (!ok) {
      bad_lines.push_back(line_no);
      continue;
    }
    data.y.push_back(std::log(time));
    data.time.push_back(time);
    data.delta.push_back(status);
    data.x.push_back(std::move(x));
  }
  if (!bad_lines.empty()) {
    std::string msg = "rejected malformed rows (line numbers):";
    for (int b : bad_lines) msg += " " + std::to_string(b);
    throw std::runtime_error(msg);
  }
  data.n = static_cast<int>(data.y.size());
  data.validate();
  return data;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_out(path);
  out << "time,status";
  for (int l = 1; l <= data.p; ++l) out << ",x" << l;
  out << "\n";
  const bool has_time = !data.time.empty();
  for (int i = 0; i < data.n; ++i) {
    const double t = has_time ? data.time[i] : std::exp(data.y[i]);
    out << format_double(t) << "," << data.delta[i];
    for (int l = 0; l < data.p; ++l) out << "," << format_double(data.x[i][l]);
    out << "\n";
  }
}

void write_chain(const std::filesystem::path& dir, const Chain& chain) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "chain.csv");
    out << "iter,k,u,tau,alpha";
    if (chain.variant == ModelVariant::M1) {
      for (int l = 1; l <= chain.p; ++l) out << ",theta_common_" << l;
    }
    for (int i = 1; i <= chain.n; ++i) out << ",alloc_" << i;
    out << "\n";
    for (const auto& d : chain.draws) {
      out << d.iter << "," << d.clusters.size() << "," << format_double(d.u)
          << "," << format_double(d.tau) << "," << format_double(d.alpha);
      if (chain.variant == ModelVariant::M1) {
        for (double t : d.theta_common) out << "," << format_double(t);
      }
      for (int a : d.alloc) out << "," << a;
      out << "\n";
    }
  }
  {
    auto out = open_out(dir / "loglik.csv");
    out << "iter";
    for (int i = 1; i <= chain.n; ++i) out << ",ll_" << i;
    out << "\n";
    for (const auto& d : chain.draws) {
      out << d.iter;
      for (double ll : d.loglik) out << "," << format_double(ll);
      out << "\n";
    }
  }
  {
    json root;
    root["variant"] = to_string(chain.variant);
    root["family"] = to_string(chain.family);
    root["n"] = chain.n;
    root["p"] = chain.p;
    root["accept_rates"] = chain.accept_rates;
    json draws = json::array();
    for (const auto& d : chain.draws) {
      json entry;
      entry["iter"] = d.iter;
      json clusters = json::array();
      for (const auto& c : d.clusters) {
        clusters.push_back({{"mu", c.mu}, {"zeta", c.zeta}, {"theta", c.theta}});
      }
      entry["clusters"] = std::move(clusters);
      draws.push_back(std::move(entry));
    }
    root["draws"] = std::move(draws);
    auto out = open_out(dir / "params.json");
    out << root.dump() << "\n";
  }
}

Chain read_chain(const std::filesystem::path& dir) {
  Chain chain;
  json root;
  {
    auto in = open_in(dir / "params.json");
    in >> root;
  }
  chain.variant = variant_from_string(root.at("variant").get<std::string>());
  chain.family = kernel_from_string(root.at("family").get<std::string>());
  chain.n = root.at("n").get<int>();
  chain.p = root.at("p").get<int>();
  for (auto& [key, value] : root.at("accept_rates").items()) {
    chain.accept_rates[key] = value.get<double>();
  }
  for (const auto& entry : root.at("draws")) {
    ChainDraw d;
    d.iter = entry.at("iter").get<int>();
    for (const auto& c : entry.at("clusters")) {
      ClusterParams params;
      params.mu = c.at("mu").get<double>();
      params.zeta = c.at("zeta").get<double>();
      params.theta = c.at("theta").get<std::vector<double>>();
      d.clusters.push_back(std::move(params));
    }
    chain.draws.push_back(std::move(d));
  }

  auto read_rows = [](std::ifstream in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) rows.push_back(split_csv_line(line));
    }
    return rows;
  };
  const auto chain_rows = read_rows(open_in(dir / "chain.csv"));
  const auto ll_rows = read_rows(open_in(dir / "loglik.csv"));
  if (chain_rows.size() != chain.draws.size() ||
      ll_rows.size() != chain.draws.size()) {
    throw std::runtime_error("chain artifacts disagree on draw count");
  }
  const int theta_cols = chain.variant == ModelVariant::M1 ? chain.p : 0;
  auto need_double = [](const std::string& cell, double& out) {
    if (!parse_double(cell, out)) {
      throw std::runtime_error("chain artifact has a malformed number: " +
                               cell);
    }
  };
  for (std::size_t m = 0; m < chain.draws.size(); ++m) {
    auto& d = chain.draws[m];
    const auto& row = chain_rows[m];
    if (static_cast<int>(row.size()) != 5 + theta_cols + chain.n) {
      throw std::runtime_error("chain.csv has unexpected column count");
    }
    need_double(row[2], d.u);
    need_double(row[3], d.tau);
    need_double(row[4], d.alpha);
    d.theta_common.resize(theta_cols);
    for (int l = 0; l < theta_cols; ++l) {
      need_double(row[5 + l], d.theta_common[l]);
    }
    d.alloc.resize(chain.n);
    for (int i = 0; i < chain.n; ++i) {
      int lab = 0;
      if (!parse_int(row[5 + theta_cols + i], lab)) {
        throw std::runtime_error("chain.csv has a non-integer allocation");
      }
      d.alloc[i] = lab;
    }
    d.loglik.resize(chain.n);
    for (int i = 0; i < chain.n; ++i) {
      const std::string& cell = ll_rows[m][1 + i];
      if (cell == "-inf") {
        d.loglik[i] = -std::numeric_limits<double>::infinity();
      } else {
        need_double(cell, d.loglik[i]);
      }
    }
  }
  return chain;
}

void write_partition(const std::filesystem::path& path, const Partition& p) {
  auto out = open_out(path);
  out << "obs_id,stratum_label\n";
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    out << i << "," << p.labels[i] << "\n";
  }
}

Partition read_partition(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    int lab = 0;
    if (fields.size() != 2 || !parse_int(fields[1], lab)) {
      throw std::runtime_error("malformed partition file: " + path.string());
    }
    labels.push_back(lab);
  }
  return Partition::from_labels(labels);
}

void write_study_rows(const std::filesystem::path& path,
                      const std::vector<StudyRow>& rows) {
  auto out = open_out(path);
  out << "dgp,variant,kernel,n,censor_level,replicate,rand_index,k_hat,"
         "runtime_s,seed\n";
  for (const auto& r : rows) {
    out << r.dgp << "," << to_string(r.variant) << "," << to_string(r.kernel)
        << "," << r.n << "," << format_double(r.censor_level) << ","
        << r.replicate << ","
        << (std::isnan(r.rand_index) ? "nan" : format_double(r.rand_index))
        << "," << r.k_hat << "," << format_double(r.runtime_s) << "," << r.seed
        << "\n";
  }
}

}  // namespace stratsurv
