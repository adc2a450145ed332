#include "seld3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "seld3d/errors.hpp"
#include "seld3d/geom.hpp"
#include "seld3d/keyvalue.hpp"

namespace seld3d {

SeldEvaluator::SeldEvaluator(std::size_t n_classes, double angular_threshold_deg,
                             double relative_distance_threshold)
    : angular_threshold_deg_(angular_threshold_deg),
      relative_distance_threshold_(relative_distance_threshold),
      counts_(n_classes) {
  if (n_classes == 0) {
    throw OutOfBoundsError("SeldEvaluator: n_classes must be positive");
  }
}

void SeldEvaluator::add_frame(const FrameEvents& pred, const FrameEvents& ref) {
  const std::size_t n = counts_.size();
  std::vector<const LabeledEvent*> pred_by_class(n, nullptr);
  std::vector<const LabeledEvent*> ref_by_class(n, nullptr);
  for (const LabeledEvent& e : pred.entries) {
    if (e.class_id < 0 || static_cast<std::size_t>(e.class_id) >= n) {
      throw OutOfBoundsError("add_frame: prediction class id out of range");
    }
    auto& slot = pred_by_class[static_cast<std::size_t>(e.class_id)];
    if (slot) throw DuplicateClassError("add_frame: duplicate prediction class");
    slot = &e;
  }
  for (const LabeledEvent& e : ref.entries) {
    if (e.class_id < 0 || static_cast<std::size_t>(e.class_id) >= n) {
      throw OutOfBoundsError("add_frame: reference class id out of range");
    }
    auto& slot = ref_by_class[static_cast<std::size_t>(e.class_id)];
    if (slot) throw DuplicateClassError("add_frame: duplicate reference class");
    slot = &e;
  }

  for (std::size_t c = 0; c < n; ++c) {
    const LabeledEvent* p = pred_by_class[c];
    const LabeledEvent* r = ref_by_class[c];
    if (p && r) {
      const double ang =
          angular_distance_deg(sph_to_cart(p->direction), sph_to_cart(r->direction));
      const double rel = std::abs(p->distance_m - r->distance_m) / r->distance_m;
      angular_error_sum_ += ang;
      relative_error_sum_ += rel;
      ++n_matched_;
      if (ang <= angular_threshold_deg_ && rel <= relative_distance_threshold_) {
        ++counts_[c].tp;
      } else {
        ++counts_[c].fp;
        ++counts_[c].fn;
      }
    } else if (p) {
      ++counts_[c].fp;
    } else if (r) {
      ++counts_[c].fn;
    }
  }
  ++frames_seen_;
}

void SeldEvaluator::add_labels(const LabelSequence& pred, const LabelSequence& ref) {
  std::map<std::size_t, std::pair<const FrameEvents*, const FrameEvents*>> by_frame;
  for (const FrameEvents& f : pred) by_frame[f.frame_index].first = &f;
  for (const FrameEvents& f : ref) by_frame[f.frame_index].second = &f;
  const FrameEvents empty;
  for (const auto& [index, pair] : by_frame) {
    add_frame(pair.first ? *pair.first : empty, pair.second ? *pair.second : empty);
  }
}

SeldScores SeldEvaluator::scores() const {
  if (frames_seen_ == 0) {
    throw EmptyEvalError("scores: no frames were evaluated");
  }
  SeldScores s;
  s.per_class = counts_;
  s.n_matched = n_matched_;
  double f_sum = 0.0;
  std::size_t f_classes = 0;
  for (const ClassCounts& c : counts_) {
    const std::size_t denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) continue;
    f_sum += 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
    ++f_classes;
  }
  s.f = f_classes > 0 ? f_sum / static_cast<double>(f_classes) : 0.0;
  if (n_matched_ > 0) {
    s.doae_deg = angular_error_sum_ / static_cast<double>(n_matched_);
    s.rde = relative_error_sum_ / static_cast<double>(n_matched_);
  }
  return s;
}

SeldScores evaluate_labels(const LabelSequence& pred, const LabelSequence& ref,
                           std::size_t n_classes) {
  if (n_classes == 0) {
    int max_class = -1;
    for (const LabelSequence* seq : {&pred, &ref}) {
      for (const FrameEvents& f : *seq) {
        for (const LabeledEvent& e : f.entries) max_class = std::max(max_class, e.class_id);
      }
    }
    n_classes = static_cast<std::size_t>(max_class + 1);
    if (n_classes == 0) n_classes = 1;
  }
  SeldEvaluator eval(n_classes);
  eval.add_labels(pred, ref);
  return eval.scores();
}

std::string format_score_report(const SeldScores& s) {
  KeyValueFile kv;
  kv.set_double("f_20_1", s.f);
  kv.set("doae_deg", s.doae_deg ? format_double(*s.doae_deg) : "none");
  kv.set("rde", s.rde ? format_double(*s.rde) : "none");
  kv.set_int("n_matched", static_cast<long long>(s.n_matched));
  kv.set_int("n_classes", static_cast<long long>(s.per_class.size()));
  for (std::size_t c = 0; c < s.per_class.size(); ++c) {
    const std::string p = "class" + std::to_string(c) + ".";
    kv.set_int(p + "tp", static_cast<long long>(s.per_class[c].tp));
    kv.set_int(p + "fp", static_cast<long long>(s.per_class[c].fp));
    kv.set_int(p + "fn", static_cast<long long>(s.per_class[c].fn));
  }
  return kv.serialize();
}

std::string format_score_csv(const SeldScores& s) {
  std::string out = "class,tp,fp,fn,f\n";
  for (std::size_t c = 0; c < s.per_class.size(); ++c) {
    const ClassCounts& cc = s.per_class[c];
    const std::size_t denom = 2 * cc.tp + cc.fp + cc.fn;
    const double f = denom > 0 ? 2.0 * static_cast<double>(cc.tp) / denom : 0.0;
    char line[128];
    std::snprintf(line, sizeof(line), "%zu,%zu,%zu,%zu,%s\n", c, cc.tp, cc.fp, cc.fn,
                  format_double(f).c_str());
    out += line;
  }
  return out;
}

}  // namespace seld3d
