//  Copyright 2026 The Typhoon Joint Authors. All Rights Reserved.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.


#include "typhoon/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "typhoon/classifier.hpp"
#include "typhoon/errors.hpp"
#include "typhoon/random.hpp"
#include "typhoon/timeutil.hpp"

namespace typhoon {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::string fmt_double(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) t += c;
  }
  return t;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth,
                          std::span<const std::size_t> pred, std::size_t k) {
  if (truth.size() != pred.size()) {
    throw ShapeError("confusion: " + std::to_string(truth.size()) + " labels vs " +
                     std::to_string(pred.size()) + " predictions");
  }
  ConfusionMatrix cm;
  cm.counts.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= k || pred[i] >= k) throw ContractError("confusion: label out of range");
    ++cm.counts[truth[i]][pred[i]];
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes();
  const double total = static_cast<double>(cm.total());
  if (total == 0.0) throw ContractError("metrics of an empty confusion matrix");
  Metrics m;
  double tp_sum = 0.0, fp_sum = 0.0, fn_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double tp = static_cast<double>(cm.counts[c][c]);
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += static_cast<double>(cm.counts[c][j]);
      col += static_cast<double>(cm.counts[j][c]);
    }
    ClassMetrics cls;
    cls.precision = ratio(tp, col);
    cls.recall = ratio(tp, row);
    cls.f1 = f1_of(cls.precision, cls.recall);
    cls.support = static_cast<std::size_t>(row);
    m.per_class.push_back(cls);
    m.f1_macro += cls.f1 / static_cast<double>(k);
    tp_sum += tp;
    fp_sum += col - tp;
    fn_sum += row - tp;
  }
  m.accuracy = tp_sum / total;
  m.precision_micro = ratio(tp_sum, tp_sum + fp_sum);
  m.recall_micro = ratio(tp_sum, tp_sum + fn_sum);
  m.f1_micro = f1_of(m.precision_micro, m.recall_micro);
  return m;
}

void write_metrics_csv(const std::filesystem::path& path, const Metrics& m,
                       std::span<const std::string_view> class_names) {
  if (class_names.size() != m.per_class.size()) {
    throw ShapeError("write_metrics_csv: class name count mismatch");
  }
  auto out = open_out(path);
  out << "scope,accuracy,precision,recall,f1,support\n";
  std::size_t support = 0;
  for (const auto& c : m.per_class) support += c.support;
  out << "micro," << fmt_double(m.accuracy, 10) << ',' << fmt_double(m.precision_micro, 10)
      << ',' << fmt_double(m.recall_micro, 10) << ',' << fmt_double(m.f1_micro, 10) << ','
      << support << '\n';
  double mp = 0.0, mr = 0.0;
  for (const auto& c : m.per_class) {
    mp += c.precision / static_cast<double>(m.per_class.size());
    mr += c.recall / static_cast<double>(m.per_class.size());
  }
  out << "macro,," << fmt_double(mp, 10) << ',' << fmt_double(mr, 10) << ','
      << fmt_double(m.f1_macro, 10) << ',' << support << '\n';
  for (std::size_t c = 0; c < m.per_class.size(); ++c) {
    const auto& pc = m.per_class[c];
    out << class_names[c] << ",," << fmt_double(pc.precision, 10) << ','
        << fmt_double(pc.recall, 10) << ',' << fmt_double(pc.f1, 10) << ',' << pc.support
        << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm,
                         std::span<const std::string_view> class_names) {
  if (class_names.size() != cm.classes()) {
    throw ShapeError("write_confusion_csv: class name count mismatch");
  }
  auto out = open_out(path);
  out << "true\\pred";
  for (auto name : class_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    out << class_names[i];
    for (std::size_t c : cm.counts[i]) out << ',' << c;
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Importance permutation_importance(const Predictor& predict,
                                  const std::vector<std::vector<double>>& x,
                                  std::span<const std::size_t> truth, std::size_t feature,
                                  std::size_t repeats, std::uint64_t seed) {
  if (repeats < 1) throw ContractError("permutation_importance: repeats must be >= 1");
  if (x.empty()) throw ContractError("permutation_importance: empty test set");
  if (feature >= x.front().size()) {
    throw ContractError("permutation_importance: feature index " + std::to_string(feature) +
                        " out of range for " + std::to_string(x.front().size()) +
                        " features");
  }
  std::size_t k = 0;
  for (std::size_t t : truth) k = std::max(k, t + 1);
  const auto score = [&](const std::vector<std::vector<double>>& rows) {
    const auto pred = predict(rows);
    std::size_t kk = k;
    for (std::size_t p : pred) kk = std::max(kk, p + 1);
    return metrics(confusion(truth, pred, kk)).f1_micro;
  };
  const double base = score(x);
  Rng rng(seed);
  Importance out;
  std::vector<double> column(x.size());
  for (std::size_t r = 0; r < repeats; ++r) {
    for (std::size_t i = 0; i < x.size(); ++i) column[i] = x[i][feature];
    rng.shuffle(std::span<double>(column));
    auto shuffled = x;
    for (std::size_t i = 0; i < x.size(); ++i) shuffled[i][feature] = column[i];
    out.drops.push_back(base - score(shuffled));
  }
  for (double d : out.drops) out.mean += d;
  out.mean /= static_cast<double>(repeats);
  for (double d : out.drops) out.stddev += (d - out.mean) * (d - out.mean);
  out.stddev = std::sqrt(out.stddev / static_cast<double>(repeats));
  return out;
}

void export_timeseries(std::span<const TimeseriesRow> rows,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "storm_id,timestamp,true_label,predicted_label,c,v_neg,v_pos,mean_sentiment\n";
  for (const auto& r : rows) {
    out << r.storm_id << ',' << format_utc(r.timestamp) << ','
        << category_name(static_cast<Category>(r.true_label)) << ','
        << category_name(static_cast<Category>(r.predicted)) << ','
        << fmt_double(r.count, 17) << ',' << fmt_double(r.v_neg, 17) << ','
        << fmt_double(r.v_pos, 17) << ',' << fmt_double(r.mean_sentiment, 17) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<TimeseriesRow> read_timeseries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<TimeseriesRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 8 columns");
    }
    TimeseriesRow r;
    r.storm_id = f[0];
    r.timestamp = parse_utc(f[1]);
    const auto t = parse_category(f[2]);
    const auto p = parse_category(f[3]);
    if (!t || !p) throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad label");
    r.true_label = static_cast<std::size_t>(*t);
    r.predicted = static_cast<std::size_t>(*p);
    try {
      r.count = std::stod(f[4]);
      r.v_neg = std::stod(f[5]);
      r.v_pos = std::stod(f[6]);
      r.mean_sentiment = std::stod(f[7]);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace typhoon
