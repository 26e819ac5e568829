#include "nsl/prob_infer.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "nsl/error.hpp"
#include "nsl/rng.hpp"
#include "nsl/solver.hpp"

namespace nsl {

Atom AnnotatedSlot::atom(const Term& value) const {
  std::vector<Term> args = alpha;
  args.push_back(value);
  return Atom(feature, std::move(args));
}

AnnotatedSlot slot_from_record(const PredictionRecord& record) {
  validate(record);
  AnnotatedSlot s;
  s.feature = record.feature;
  if (record.alpha) s.alpha.push_back(Term::constant(*record.alpha));
  for (int v = 0; v < record.k(); ++v) s.support.emplace_back(Term::integer(v), record.probs[static_cast<std::size_t>(v)]);
  return s;
}

AnnotatedSlot one_hot_slot(std::string feature, std::vector<Term> alpha, Term value) {
  return {std::move(feature), std::move(alpha), {{value, 1.0}}, 0.0};
}

AnnotatedSlot prob_support_prune(const AnnotatedSlot& slot, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ArgumentError("epsilon must be in [0, 1)");
  if (epsilon == 0.0) return slot;
  AnnotatedSlot out{slot.feature, slot.alpha, {}, slot.dropped};
  double kept = 0.0;
  for (const auto& [v, p] : slot.support) {
    if (p < epsilon) {
      out.dropped += p;
    } else {
      out.support.emplace_back(v, p);
      kept += p;
    }
  }
  if (out.support.empty() || kept <= 0.0) throw ArgumentError("every value of slot " + slot.feature + " was pruned");
  for (auto& entry : out.support) entry.second /= kept;
  return out;
}

double LabelDistribution::probability(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return probs[i];
  }
  throw ArgumentError("unknown label " + label);
}

namespace {

// Neumaier compensated sum.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct PreparedSlot {
  std::vector<Atom> atoms;
  std::vector<double> probs;
};

struct Accumulator {
  std::vector<KahanSum> label;
  KahanSum abstain;
};

constexpr std::size_t kChunks = 64;

}  // namespace

struct ProbClassifier::Impl {
  Solver solver;
  std::vector<CompiledRule> rules;
  std::vector<int> rule_label;
  LabelMode mode;
  std::vector<Atom> labels;
  // Per body predicate: the constants used at the last argument, or nullopt
  // when a variable occurs there.
  std::map<PredicateKey, std::optional<std::set<std::string>>> last_arg;

  Impl(const LogicProgram& h, const LogicProgram& bg, LabelMode m, std::vector<Atom> ls)
      : solver(bg), mode(std::move(m)), labels(std::move(ls)) {
    if (labels.empty() || labels.size() > 64) throw ArgumentError("need between 1 and 64 labels");
    if (mode.kind == LabelMode::Kind::Binary && (labels.size() != 2 || labels[0] != mode.positive)) {
      throw ArgumentError("binary mode needs labels {positive, negative}");
    }
    for (const auto& r : h.rules) {
      rules.emplace_back(r);
      auto it = std::find(labels.begin(), labels.end(), r.head);
      rule_label.push_back(it == labels.end() ? -1 : static_cast<int>(it - labels.begin()));
    }
    auto note = [&](const Atom& a) {
      if (a.args.empty()) return;
      auto [it, fresh] = last_arg.try_emplace(a.key(), std::set<std::string>{});
      if (!it->second) return;
      const Term& t = a.args.back();
      if (t.is_variable()) {
        it->second.reset();
      } else {
        it->second->insert(t.to_string());
      }
    };
    for (const auto* program : {&h, &bg}) {
      for (const auto& r : program->rules) {
        for (const auto& a : r.body_pos) note(a);
        for (const auto& a : r.body_neg) note(a);
      }
    }
  }

  std::uint64_t derive(const Interpretation& ctx) const {
    const Interpretation model = solver.solve(ctx);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (model.contains(labels[i])) bits |= std::uint64_t{1} << i;
    }
    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (rule_label[r] < 0 || (bits >> rule_label[r] & 1U)) continue;
      if (rules[r].body_holds(model)) bits |= std::uint64_t{1} << rule_label[r];
    }
    return bits;
  }

  // Merges values that no rule body can match, then prunes.
  std::vector<PreparedSlot> prepare(std::span<const AnnotatedSlot> slots, double epsilon, double& dropped) const {
    std::vector<PreparedSlot> out;
    std::set<std::string> seen;
    dropped = 0.0;
    for (const auto& raw : slots) {
      if (raw.support.empty()) throw ArgumentError("slot " + raw.feature + " has no values");
      std::string key = raw.feature + "(";
      for (const auto& a : raw.alpha) key += a.to_string() + ",";
      if (!seen.insert(key).second) throw ArgumentError("two slots for " + key + ")");
      double total = 0.0;
      for (const auto& [v, p] : raw.support) {
        if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("slot " + key + ") has a probability outside [0,1]");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("slot " + key + ") does not sum to 1");

      AnnotatedSlot merged{raw.feature, raw.alpha, {}, raw.dropped};
      const PredicateKey pk{intern(raw.feature), static_cast<std::uint32_t>(raw.alpha.size() + 1)};
      auto it = last_arg.find(pk);
      const bool unused = it == last_arg.end();
      std::optional<std::size_t> inert;
      for (const auto& [v, p] : raw.support) {
        const bool matters = !unused && (!it->second || it->second->count(v.to_string()));
        if (matters) {
          merged.support.emplace_back(v, p);
        } else if (inert) {
          merged.support[*inert].second += p;
        } else {
          inert = merged.support.size();
          merged.support.emplace_back(v, p);
        }
      }
      auto pruned = prob_support_prune(merged, epsilon);
      dropped += pruned.dropped;
      PreparedSlot ps;
      for (const auto& [v, p] : pruned.support) {
        ps.atoms.push_back(pruned.atom(v));
        ps.probs.push_back(p);
      }
      out.push_back(std::move(ps));
    }
    return out;
  }

  void record(std::uint64_t bits, double w, Accumulator& acc) const {
    if (mode.kind == LabelMode::Kind::Binary) {
      if (bits & 1U) acc.label[0].add(w);
      return;
    }
    if (std::popcount(bits) == 1) {
      acc.label[static_cast<std::size_t>(std::countr_zero(bits))].add(w);
    } else {
      acc.abstain.add(w);
    }
  }

  void enumerate(const std::vector<PreparedSlot>& slots, std::uint64_t begin, std::uint64_t end,
                 Accumulator& acc) const {
    std::vector<std::size_t> digits(slots.size());
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      std::uint64_t rest = idx;
      for (std::size_t s = slots.size(); s-- > 0;) {
        const auto n = slots[s].probs.size();
        digits[s] = static_cast<std::size_t>(rest % n);
        rest /= n;
      }
      double w = 1.0;
      Interpretation ctx;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        w *= slots[s].probs[digits[s]];
        ctx.insert(slots[s].atoms[digits[s]]);
      }
      record(derive(ctx), w, acc);
    }
  }

  void sample(const std::vector<PreparedSlot>& slots, std::uint64_t n, std::uint64_t seed,
              std::vector<std::uint64_t>& hits, std::uint64_t& abstain) const {
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < n; ++i) {
      Interpretation ctx;
      for (const auto& s : slots) {
        const double u = uniform01(rng);
        double c = 0.0;
        std::size_t v = 0;
        for (; v + 1 < s.probs.size(); ++v) {
          c += s.probs[v];
          if (u < c) break;
        }
        ctx.insert(s.atoms[v]);
      }
      const auto bits = derive(ctx);
      if (mode.kind == LabelMode::Kind::Binary) {
        if (bits & 1U) ++hits[0];
      } else if (std::popcount(bits) == 1) {
        ++hits[static_cast<std::size_t>(std::countr_zero(bits))];
      } else {
        ++abstain;
      }
    }
  }

  Accumulator empty_accumulator() const { return {std::vector<KahanSum>(labels.size()), {}}; }

  LabelDistribution finish(std::vector<double> probs, double abstain) const {
    LabelDistribution d;
    for (const auto& l : labels) d.labels.push_back(l.to_string());
    if (mode.kind == LabelMode::Kind::Binary) {
      probs[1] = 1.0 - probs[0];
      abstain = 0.0;
    }
    d.probs = std::move(probs);
    d.abstain_mass = abstain;
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
      if (d.probs[i] <= 0.0) continue;
      if (d.predicted.empty() || d.probs[i] > d.confidence ||
          (d.probs[i] == d.confidence && d.labels[i] < d.predicted)) {
        d.predicted = d.labels[i];
        d.confidence = d.probs[i];
      }
    }
    return d;
  }

  LabelDistribution run(std::span<const AnnotatedSlot> raw, const ProbOptions& opt, bool parallel) const {
    double dropped = 0.0;
    const auto slots = prepare(raw, opt.epsilon, dropped);
    std::uint64_t total = 1;
    bool over = false;
    for (const auto& s : slots) {
      if (total > opt.exact_cap / s.probs.size()) over = true;
      total *= over ? 1 : s.probs.size();
    }
    if (over || total > opt.exact_cap) {
      if (!opt.monte_carlo) throw ResourceError("joint support exceeds the exact cap of " + std::to_string(opt.exact_cap));
      return monte_carlo(slots, opt, parallel, dropped);
    }
    std::vector<double> probs(labels.size(), 0.0);
    double abstain = 0.0;
    if (!parallel) {
      Accumulator acc = empty_accumulator();
      enumerate(slots, 0, total, acc);
      for (std::size_t i = 0; i < labels.size(); ++i) probs[i] = acc.label[i].value();
      abstain = acc.abstain.value();
    } else {
      const std::size_t chunks = static_cast<std::size_t>(std::min<std::uint64_t>(kChunks, total));
      std::vector<Accumulator> parts(chunks, empty_accumulator());
      const auto n = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t c = 0; c < n; ++c) {
        const auto cu = static_cast<std::uint64_t>(c);
        enumerate(slots, total * cu / chunks, total * (cu + 1) / chunks, parts[static_cast<std::size_t>(c)]);
      }
      Accumulator acc = empty_accumulator();
      for (const auto& p : parts) {
        for (std::size_t i = 0; i < labels.size(); ++i) acc.label[i].add(p.label[i].value());
        acc.abstain.add(p.abstain.value());
      }
      for (std::size_t i = 0; i < labels.size(); ++i) probs[i] = acc.label[i].value();
      abstain = acc.abstain.value();
    }
    auto d = finish(std::move(probs), abstain);
    d.assignments = total;
    d.dropped_mass = dropped;
    return d;
  }

  LabelDistribution monte_carlo(const std::vector<PreparedSlot>& slots, const ProbOptions& opt, bool parallel,
                                double dropped) const {
    if (opt.samples == 0) throw ArgumentError("Monte Carlo needs at least one sample");
    std::vector<std::vector<std::uint64_t>> hits(kChunks, std::vector<std::uint64_t>(labels.size(), 0));
    std::vector<std::uint64_t> abstain(kChunks, 0);
    const auto n = static_cast<std::int64_t>(kChunks);
    auto chunk = [&](std::int64_t c) {
      const auto cu = static_cast<std::uint64_t>(c);
      const std::uint64_t count = opt.samples * (cu + 1) / kChunks - opt.samples * cu / kChunks;
      sample(slots, count, splitmix64(opt.seed ^ splitmix64(cu + 1)), hits[static_cast<std::size_t>(c)],
             abstain[static_cast<std::size_t>(c)]);
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t c = 0; c < n; ++c) chunk(c);
    } else {
      for (std::int64_t c = 0; c < n; ++c) chunk(c);
    }
    std::vector<double> probs(labels.size(), 0.0);
    std::uint64_t abst = 0;
    for (std::size_t c = 0; c < kChunks; ++c) {
      for (std::size_t i = 0; i < labels.size(); ++i) probs[i] += static_cast<double>(hits[c][i]);
      abst += abstain[c];
    }
    const double s = static_cast<double>(opt.samples);
    for (auto& p : probs) p /= s;
    auto d = finish(std::move(probs), static_cast<double>(abst) / s);
    d.exact = false;
    d.samples = opt.samples;
    d.dropped_mass = dropped;
    return d;
  }
};

ProbClassifier::ProbClassifier(const LogicProgram& hypothesis, const LogicProgram& background, LabelMode mode,
                               std::vector<Atom> labels)
    : impl_(std::make_unique<Impl>(hypothesis, background, std::move(mode), std::move(labels))) {}
ProbClassifier::~ProbClassifier() = default;
ProbClassifier::ProbClassifier(ProbClassifier&&) noexcept = default;
ProbClassifier& ProbClassifier::operator=(ProbClassifier&&) noexcept = default;

LabelDistribution ProbClassifier::classify(std::span<const AnnotatedSlot> slots, const ProbOptions& options) const {
  return impl_->run(slots, options, options.parallel);
}

LabelDistribution ProbClassifier::classify_serial(std::span<const AnnotatedSlot> slots,
                                                  const ProbOptions& options) const {
  return impl_->run(slots, options, false);
}

std::uint64_t ProbClassifier::derive(const Interpretation& context) const { return impl_->derive(context); }

LabelDistribution classify_prob(const LogicProgram& hypothesis, const LogicProgram& background,
                                std::span<const AnnotatedSlot> slots, const LabelMode& mode,
                                std::span<const Atom> labels, const ProbOptions& options) {
  ProbClassifier c(hypothesis, background, mode, std::vector<Atom>(labels.begin(), labels.end()));
  return c.classify(slots, options);
}

namespace {

std::string problog_rule(const Rule& r) {
  std::string out = r.head.to_string();
  if (r.is_fact()) return out + ".";
  std::vector<std::string> body;
  for (const auto& a : r.body_pos) body.push_back(a.to_string());
  for (const auto& a : r.body_neg) body.push_back("\\+ " + a.to_string());
  for (const auto& c : r.comparisons) {
    std::string_view op;
    switch (c.op) {
      case CmpOp::Eq: op = "="; break;
      case CmpOp::Ne: op = "\\="; break;
      case CmpOp::Lt: op = "<"; break;
      case CmpOp::Le: op = "=<"; break;
      case CmpOp::Gt: op = ">"; break;
      case CmpOp::Ge: op = ">="; break;
    }
    body.push_back(c.lhs.to_string() + " " + std::string(op) + " " + c.rhs.to_string());
  }
  out += " :- ";
  for (std::size_t i = 0; i < body.size(); ++i) out += (i ? ", " : "") + body[i];
  return out + ".";
}

std::string number(double p) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
  return std::string(buf, ptr);
}

}  // namespace

std::string export_problog(const LogicProgram& hypothesis, const LogicProgram& background,
                           std::span<const AnnotatedSlot> slots) {
  std::ostringstream out;
  for (const auto& r : hypothesis.rules) out << problog_rule(r) << '\n';
  for (const auto& r : background.rules) out << problog_rule(r) << '\n';
  for (const auto& s : slots) {
    for (std::size_t i = 0; i < s.support.size(); ++i) {
      out << (i ? "; " : "") << number(s.support[i].second) << "::" << s.atom(s.support[i].first).to_string();
    }
    out << ".\n";
  }
  return out.str();
}

}  // namespace nsl
