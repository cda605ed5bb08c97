#include "fids/error.hpp"
#include "fids/metrics.hpp"
#include "fids/simulator.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

namespace fids {
namespace {

namespace fs = std::filesystem;

MetricSample nominal(double t) {
  MetricSample s;
  s.timestamp = t;
  s.avg_request_time = 0.2;
  s.iow_i = s.iow_o = s.iod_i = s.iod_o = 500.0;
  s.ion_i = s.ion_o = 100.0;
  s.cpu_w = s.cpu_d = s.cpu_n = 20.0;
  s.mem_w = 30.0;
  s.r_syn = 0.4;
  s.r_ack = 0.4;
  s.r_synack = 0.2;
  s.np_i = s.np_o = 1000.0;
  s.nhop = 10;
  return s;
}

MetricSeries constant_series(std::size_t n) {
  std::vector<MetricSample> v;
  for (std::size_t i = 0; i < n; ++i) {
    v.push_back(nominal(static_cast<double>(i)));
  }
  return MetricSeries(std::move(v));
}

/// Random but valid series with awkward floating values.
MetricSeries random_series(std::size_t n, std::uint64_t seed, bool labeled) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MetricSample> v;
  std::vector<TrafficClass> labels;
  double t = u(gen);
  for (std::size_t i = 0; i < n; ++i) {
    MetricSample s;
    t += 1e-3 + u(gen);
    s.timestamp = t;
    for (auto m : base_metrics()) {
      double x = u(gen);
      switch (m) {
      case Metric::CpuW:
      case Metric::CpuD:
      case Metric::CpuN:
      case Metric::MemW:
        x *= 100.0;
        break;
      case Metric::RSyn:
      case Metric::RAck:
      case Metric::RSynAck:
        x /= 3.0;
        break;
      case Metric::Nhop:
        x = std::floor(x * 1e6);
        break;
      default:
        x = x * 1e4 / 3.0;
      }
      s.set(m, x);
    }
    v.push_back(s);
    labels.push_back(static_cast<TrafficClass>(gen() % 5));
  }
  return labeled ? MetricSeries(std::move(v), std::move(labels)) : MetricSeries(std::move(v));
}

class TempDir {
public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("fids_metrics_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string nominal_row(double t, const std::string& cpu_w = "20") {
  return std::to_string(t) + ",0.2,500,500,500,500,100,100," + cpu_w + ",20,20,30,0.4,0.4,0.2,1000,1000,10";
}

TEST(Metrics, CsvWithLabelsLoadsThreeSamples) {
  TempDir dir;
  const auto path = dir.path() / "s.csv";
  write(path, canonical_csv_header(true) + "\n" + nominal_row(0) + ",0\n" + nominal_row(1) + ",3\n" +
                  nominal_row(2) + ",3\n");
  const auto s = load_series(path, SeriesFormat::Csv);
  ASSERT_EQ(s.size(), 3u);
  ASSERT_TRUE(s.has_labels());
  EXPECT_EQ(s.labels()[1], TrafficClass::SynFlood);
  EXPECT_EQ(s.samples()[2].nhop, 10u);
  EXPECT_DOUBLE_EQ(s.samples()[0].avg_request_time, 0.2);
}

TEST(Metrics, WriterOutputRoundTrips) {
  const auto s = random_series(3, 1, true);
  EXPECT_EQ(parse_csv(to_csv(s)), s);
}

TEST(Metrics, MissingColumnNamesTheColumn) {
  TempDir dir;
  const auto path = dir.path() / "s.csv";
  auto header = canonical_csv_header(false);
  header.erase(header.find(",nhop"));
  write(path, header + "\n");
  try {
    load_series(path, SeriesFormat::Csv);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "nhop");
    EXPECT_NE(std::string(e.what()).find("nhop"), std::string::npos);
  }
}

TEST(Metrics, OutOfRangePercentReportsRowAndField) {
  TempDir dir;
  const auto path = dir.path() / "s.csv";
  write(path, canonical_csv_header(false) + "\n" + nominal_row(0) + "\n" + nominal_row(1, "150") + "\n");
  try {
    load_series(path, SeriesFormat::Csv);
    FAIL() << "expected RangeError";
  } catch (const RangeError& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.field(), "cpu_w");
  }
}

TEST(Metrics, NonMonotoneTimestampsReportIndex) {
  const std::string text = canonical_csv_header(false) + "\n" + nominal_row(0) + "\n" + nominal_row(2) + "\n" +
                           nominal_row(2) + "\n";
  try {
    parse_csv(text);
    FAIL() << "expected OrderingError";
  } catch (const OrderingError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(Metrics, SampleInvariantsAreEnforced) {
  auto s = nominal(0);
  s.r_syn = 0.6;
  s.r_ack = 0.6;
  EXPECT_THROW(validate_sample(s, 0), RangeError);
  s = nominal(0);
  s.np_i = -1;
  EXPECT_THROW(validate_sample(s, 0), RangeError);
  s = nominal(0);
  s.r_ack = 1.5;
  EXPECT_THROW(validate_sample(s, 0), RangeError);
  s = nominal(0);
  s.timestamp = -1;
  EXPECT_THROW(validate_sample(s, 0), RangeError);
  EXPECT_NO_THROW(validate_sample(nominal(0), 0));
}

TEST(Metrics, FractionalHalfOpenCountIsRejected) {
  auto text = canonical_csv_header(false) + "\n" + nominal_row(0);
  text.replace(text.rfind(",10"), 3, ",10.5");
  EXPECT_THROW(parse_csv(text), RangeError);
}

TEST(Metrics, LabelCountMustMatch) {
  std::vector<MetricSample> v{nominal(0), nominal(1)};
  EXPECT_THROW(MetricSeries(v, std::vector<TrafficClass>{TrafficClass::Normal}), InputError);
}

TEST(Metrics, JsonlRequiresEveryKey) {
  auto s = constant_series(2);
  auto text = to_jsonl(s);
  text.replace(text.find("\"mem_w\""), 7, "\"mem_x\"");
  try {
    parse_jsonl(text);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "mem_w");
  }
}

TEST(Metrics, RoundTripIsBitExactForCsvAndJsonl) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_series(1 + seed * 3, seed, seed % 2 == 0);
    save_series(s, dir.path() / "a.csv", SeriesFormat::Csv);
    save_series(s, dir.path() / "a.jsonl", SeriesFormat::Jsonl);
    EXPECT_EQ(load_series(dir.path() / "a.csv"), s) << "seed " << seed;
    EXPECT_EQ(load_series(dir.path() / "a.jsonl"), s) << "seed " << seed;
  }
}

TEST(Metrics, SliceWindowsTilesDeterministically) {
  const auto s = constant_series(100);
  EXPECT_EQ(slice_windows(s, 20, 20).size(), 5u);
  const auto w30 = slice_windows(s, 30, 30);
  ASSERT_EQ(w30.size(), 3u);
  EXPECT_EQ(w30.back().end(), 90u);
  EXPECT_TRUE(slice_windows(constant_series(10), 20, 20).empty());
  EXPECT_EQ(slice_windows(s, 20, 10).size(), 9u);
  EXPECT_THROW(slice_windows(s, 3, 1), ConfigError);
  EXPECT_THROW(slice_windows(s, 10, 0), ConfigError);
}

TEST(Metrics, WindowsAtFullStrideReconstructAPrefix) {
  const auto s = random_series(97, 5, false);
  for (std::size_t len : {4u, 7u, 30u}) {
    std::vector<MetricSample> joined;
    for (const auto& w : slice_windows(s, len, len)) {
      EXPECT_LE(w.end(), s.size());
      joined.insert(joined.end(), w.samples().begin(), w.samples().end());
    }
    ASSERT_EQ(joined.size(), (s.size() / len) * len);
    EXPECT_TRUE(std::equal(joined.begin(), joined.end(), s.samples().begin()));
  }
}

TEST(Metrics, WindowCarriesMajorityLabel) {
  std::vector<MetricSample> v;
  std::vector<TrafficClass> labels;
  for (int i = 0; i < 10; ++i) {
    v.push_back(nominal(i));
    labels.push_back(i < 4 ? TrafficClass::Normal : TrafficClass::DnsFlood);
  }
  const MetricSeries s(v, labels);
  const auto w = slice_windows(s, 10, 10);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].label(), TrafficClass::DnsFlood);
  EXPECT_FALSE(slice_windows(constant_series(10), 10, 10)[0].label().has_value());
}

TEST(Metrics, ExtractChannelProjectsInOrder) {
  std::vector<MetricSample> v;
  for (int i = 0; i < 5; ++i) {
    auto s = nominal(i);
    s.mem_w = 10.0 + i;
    v.push_back(s);
  }
  const MetricSeries s(v);
  const Window w(s, 0, 5);
  EXPECT_EQ(extract_channel(w, "mem_w"), (std::vector<double>{10, 11, 12, 13, 14}));
  EXPECT_EQ(extract_channel(w, "tsp"), extract_channel(w, Metric::AvgRequestTime));
  EXPECT_DOUBLE_EQ(extract_channel(w, Metric::SynAckRatio)[0], 1.0);
}

TEST(Metrics, UnknownChannelListsValidIdentifiers) {
  const auto s = constant_series(5);
  const Window w(s, 0, 5);
  try {
    extract_channel(w, "bogus");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bogus"), std::string::npos);
    EXPECT_NE(what.find("nhop"), std::string::npos);
    EXPECT_NE(what.find("avg_request_time"), std::string::npos);
  }
}

TEST(Metrics, SynFloodPacketChannelHasElevatedTail) {
  auto cfg = sim::make_scenario(sim::Scenario::SynFlood, 30, 12, 7);
  const auto g = sim::generate(cfg);
  const Window w(g.series, 0, 30);
  const auto np = extract_channel(w, Metric::NpI);
  ASSERT_EQ(np.size(), 30u);
  const double pre = std::accumulate(np.begin(), np.begin() + 12, 0.0) / 12.0;
  const double post = std::accumulate(np.begin() + 12, np.end(), 0.0) / 18.0;
  // Scenario config: 1000 pkt/s baseline, x(100000/20000) after onset, 5% noise.
  EXPECT_NEAR(pre, 1000.0, 50.0);
  EXPECT_NEAR(post / pre, cfg.syn_flood_packets / cfg.normal_load_packets, 0.5);
}

TEST(Metrics, MetricNamesRoundTrip) {
  for (auto m : base_metrics()) {
    EXPECT_EQ(parse_metric(metric_name(m)), m);
  }
  EXPECT_EQ(base_metrics().size(), 17u);
  EXPECT_THROW(class_from_int(5), InputError);
  EXPECT_EQ(class_from_int(3), TrafficClass::SynFlood);
}

} // namespace
} // namespace fids
