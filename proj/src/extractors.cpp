#include "nsl/extractors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "nsl/error.hpp"
#include "nsl/rng.hpp"

namespace nsl {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kRenormTolerance = 1e-6;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void check_range(const ConfRange& r, const std::string& what) {
  if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) {
    throw ArgumentError(what + ": confidence range must satisfy 0 <= lo <= hi <= 1");
  }
}

std::string slot_key(std::string_view feature, const std::optional<std::string>& alpha) {
  std::string out(feature);
  if (alpha) out += "(" + *alpha + ")";
  return out;
}

}  // namespace

int PredictionRecord::argmax() const {
  if (probs.empty()) throw ArgumentError("argmax of an empty probability vector");
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double PredictionRecord::confidence() const { return probs[static_cast<std::size_t>(argmax())]; }

void validate(const PredictionRecord& r) {
  if (r.example_id.empty()) throw ArgumentError("prediction record without example_id");
  if (r.feature.empty()) throw ArgumentError("prediction record without feature");
  if (r.alpha && r.alpha->empty()) throw ArgumentError("empty alpha in record " + r.example_id);
  if (r.k() < 2) throw ArgumentError("prediction record for " + r.example_id + " has fewer than 2 classes");
  for (double p : r.probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("probability outside [0,1] in record " + r.example_id);
  }
  if (std::abs(sum_of(r.probs) - 1.0) > kSumTolerance) {
    throw ArgumentError("probabilities of record " + r.example_id + " do not sum to 1");
  }
  if (r.true_value < 0 || r.true_value >= r.k()) throw ArgumentError("true_value outside [0,k) in " + r.example_id);
}

FeaturePrediction to_feature_prediction(const PredictionRecord& r) {
  FeaturePrediction f;
  f.value = Term::integer(r.argmax());
  f.feature = r.feature;
  if (r.alpha) f.alpha.push_back(Term::constant(*r.alpha));
  f.confidence = r.confidence();
  return f;
}

OracleProfile OracleProfile::perfect(std::uint64_t seed) { return {"perfect", 1.0, {1.0, 1.0}, 1.0, {1.0, 1.0}, seed}; }

OracleProfile OracleProfile::softmax_sim(std::uint64_t seed) {
  return {"softmax_sim", 0.99, {0.95, 0.999}, 0.10, {0.70, 0.99}, seed};
}

OracleProfile OracleProfile::edl_sim(std::uint64_t seed) {
  return {"edl_sim", 0.99, {0.95, 0.999}, 0.10, {0.10, 0.40}, seed};
}

OracleProfile OracleProfile::by_name(std::string_view name, std::uint64_t seed) {
  if (name == "perfect") return perfect(seed);
  if (name == "softmax_sim") return softmax_sim(seed);
  if (name == "edl_sim") return edl_sim(seed);
  throw ArgumentError("unknown oracle profile: " + std::string(name));
}

void validate(const OracleProfile& p) {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(p.clean_accuracy) || !unit(p.perturbed_accuracy)) {
    throw ArgumentError("profile " + p.name + ": accuracy outside [0,1]");
  }
  check_range(p.clean_conf, "profile " + p.name + " (clean)");
  check_range(p.perturbed_conf, "profile " + p.name + " (perturbed)");
}

std::string to_string(PerturbScope scope) {
  switch (scope) {
    case PerturbScope::Train: return "train";
    case PerturbScope::Test: return "test";
    case PerturbScope::Both: return "both";
  }
  return "both";
}

PerturbScope parse_scope(std::string_view text) {
  if (text == "train") return PerturbScope::Train;
  if (text == "test") return PerturbScope::Test;
  if (text == "both") return PerturbScope::Both;
  throw ArgumentError("unknown perturbation scope: " + std::string(text));
}

std::set<std::string> plan_perturbation(std::span<const std::string> ids, const PerturbationPlan& plan) {
  if (!(plan.fraction >= 0.0 && plan.fraction <= 1.0)) throw ArgumentError("perturbation fraction outside [0,1]");
  const auto n = ids.size();
  const auto m = static_cast<std::size_t>(std::floor(plan.fraction * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(splitmix64(plan.rng_seed));
  // partial Fisher-Yates: the first m positions are the sample
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
    std::swap(order[i], order[std::min(j, n - 1)]);
  }
  std::set<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.insert(ids[order[i]]);
  return out;
}

std::uint64_t record_seed(std::uint64_t seed, std::string_view example_id, std::string_view slot) {
  std::uint64_t h = fnv1a(example_id, 0xCBF29CE484222325ULL);
  h = fnv1a("\x1f", h);
  h = fnv1a(slot, h);
  return splitmix64(h ^ splitmix64(seed));
}

std::vector<double> synth_predict(int true_value, int k, bool perturbed, const OracleProfile& profile,
                                  std::string_view example_id, std::string_view slot) {
  if (k < 2) throw ArgumentError("synth_predict: k must be >= 2");
  if (true_value < 0 || true_value >= k) throw ArgumentError("synth_predict: true_value outside [0,k)");
  validate(profile);
  const double accuracy = perturbed ? profile.perturbed_accuracy : profile.clean_accuracy;
  const ConfRange range = perturbed ? profile.perturbed_conf : profile.clean_conf;

  std::mt19937_64 rng(record_seed(profile.rng_seed, example_id, slot));
  const bool correct = uniform01(rng) < accuracy;
  const double c = range.lo + uniform01(rng) * (range.hi - range.lo);
  int predicted = true_value;
  if (!correct) {
    int wrong = std::min(k - 2, static_cast<int>(uniform01(rng) * (k - 1)));
    predicted = wrong >= true_value ? wrong + 1 : wrong;
  }
  std::vector<double> probs(static_cast<std::size_t>(k), (1.0 - c) / (k - 1));
  probs[static_cast<std::size_t>(predicted)] = c;
  return probs;
}

PredictionRecord synth_record(std::string example_id, std::string feature, std::optional<std::string> alpha,
                              int true_value, int k, bool perturbed, const OracleProfile& profile) {
  PredictionRecord r;
  r.probs = synth_predict(true_value, k, perturbed, profile, example_id, slot_key(feature, alpha));
  r.example_id = std::move(example_id);
  r.feature = std::move(feature);
  r.alpha = std::move(alpha);
  r.true_value = true_value;
  r.perturbed = perturbed;
  return r;
}

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& msg) { throw ParseError(msg, line, 1); }

void finish_record(PredictionRecord& r, std::size_t line) {
  const double s = sum_of(r.probs);
  if (std::abs(s - 1.0) > kRenormTolerance) bad_line(line, "probabilities sum to " + std::to_string(s));
  if (std::abs(s - 1.0) > kSumTolerance) {
    for (double& p : r.probs) p /= s;
  }
  try {
    validate(r);
  } catch (const ArgumentError& e) {
    bad_line(line, e.what());
  }
}

PredictionRecord parse_json_record(std::string_view text, std::size_t line) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad_line(line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_line(line, "record is not an object");
  PredictionRecord r;
  try {
    r.example_id = j.at("example_id").get<std::string>();
    r.feature = j.at("feature").get<std::string>();
    if (j.contains("alpha") && !j["alpha"].is_null()) r.alpha = j["alpha"].get<std::string>();
    const int k = j.at("k").get<int>();
    r.probs = j.at("probs").get<std::vector<double>>();
    if (k != r.k()) bad_line(line, "probs has " + std::to_string(r.k()) + " entries, k = " + std::to_string(k));
    r.true_value = j.at("true_value").get<int>();
    r.perturbed = j.at("perturbed").get<bool>();
  } catch (const json::exception& e) {
    bad_line(line, std::string("schema violation: ") + e.what());
  }
  finish_record(r, line);
  return r;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    bad_line(line, std::string("bad ") + what + ": '" + std::string(field) + "'");
  }
  return value;
}

const std::vector<std::string> kCsvFixed = {"example_id", "feature", "alpha", "k", "true_value", "perturbed"};

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<PredictionRecord> load_predictions(std::istream& source) {
  std::vector<PredictionRecord> out;
  std::string raw;
  std::size_t line_no = 0;
  enum class Mode { Unknown, Json, Csv } mode = Mode::Unknown;
  std::size_t csv_k = 0;
  while (std::getline(source, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string_view line(raw);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    if (mode == Mode::Unknown) {
      if (line[first] == '{') {
        mode = Mode::Json;
      } else {
        auto header = split_csv(line);
        if (header.size() < kCsvFixed.size() + 2) bad_line(line_no, "CSV header too short");
        for (std::size_t i = 0; i < kCsvFixed.size(); ++i) {
          if (header[i] != kCsvFixed[i]) bad_line(line_no, "expected CSV column " + kCsvFixed[i]);
        }
        csv_k = header.size() - kCsvFixed.size();
        for (std::size_t i = 0; i < csv_k; ++i) {
          if (header[kCsvFixed.size() + i] != "p" + std::to_string(i)) bad_line(line_no, "expected column p" + std::to_string(i));
        }
        mode = Mode::Csv;
        continue;
      }
    }
    if (mode == Mode::Json) {
      out.push_back(parse_json_record(line, line_no));
      continue;
    }
    auto fields = split_csv(line);
    if (fields.size() != kCsvFixed.size() + csv_k) bad_line(line_no, "wrong number of CSV fields");
    PredictionRecord r;
    r.example_id = std::string(fields[0]);
    r.feature = std::string(fields[1]);
    if (!fields[2].empty()) r.alpha = std::string(fields[2]);
    const auto k = parse_number<std::size_t>(fields[3], line_no, "k");
    if (k != csv_k) bad_line(line_no, "k does not match the number of probability columns");
    r.true_value = parse_number<int>(fields[4], line_no, "true_value");
    if (fields[5] == "true" || fields[5] == "1") {
      r.perturbed = true;
    } else if (fields[5] == "false" || fields[5] == "0") {
      r.perturbed = false;
    } else {
      bad_line(line_no, "bad perturbed flag");
    }
    for (std::size_t i = 0; i < csv_k; ++i) r.probs.push_back(parse_number<double>(fields[6 + i], line_no, "probability"));
    finish_record(r, line_no);
    out.push_back(std::move(r));
  }
  return out;
}

void write_predictions(std::span<const PredictionRecord> records, std::ostream& sink, PredictionFormat format) {
  for (const auto& r : records) validate(r);
  if (format == PredictionFormat::Jsonl) {
    for (const auto& r : records) {
      nlohmann::ordered_json j;
      j["example_id"] = r.example_id;
      j["feature"] = r.feature;
      if (r.alpha) j["alpha"] = *r.alpha;
      j["k"] = r.k();
      j["probs"] = r.probs;
      j["true_value"] = r.true_value;
      j["perturbed"] = r.perturbed;
      sink << j.dump() << '\n';
    }
    return;
  }
  if (records.empty()) return;
  const int k = records.front().k();
  for (const auto& r : records) {
    if (r.k() != k) throw ArgumentError("CSV output needs the same k for every record");
    auto has_comma = [](const std::string& s) { return s.find_first_of(",\n") != std::string::npos; };
    if (has_comma(r.example_id) || has_comma(r.feature) || (r.alpha && has_comma(*r.alpha))) {
      throw ArgumentError("CSV fields may not contain commas or newlines");
    }
  }
  for (const auto& c : kCsvFixed) sink << c << ',';
  for (int i = 0; i < k; ++i) sink << 'p' << i << (i + 1 < k ? "," : "\n");
  for (const auto& r : records) {
    sink << r.example_id << ',' << r.feature << ',' << r.alpha.value_or("") << ',' << k << ',' << r.true_value << ','
         << (r.perturbed ? "true" : "false");
    for (double p : r.probs) sink << ',' << format_double(p);
    sink << '\n';
  }
}

}  // namespace nsl
