#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "htrm/config.hpp"
#include "htrm/eigen_cache.hpp"
#include "htrm/output.hpp"

namespace fs = std::filesystem;
using namespace htrm;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("htrm-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

EigenCacheHeader header() {
  EigenCacheHeader h;
  h.spec.n = 3;
  h.spec.l = 2;
  h.spec.kind = EnsembleKind::inverse_ginibre_direct_sum;
  h.master_seed = 11;
  h.stream_tag = "inverse-ginibre-direct-sum";
  h.trials = 2;
  return h;
}

}  // namespace

TEST(EigenCache, RoundTripIsBitExact) {
  const auto dir = scratch("cache");
  const auto h = header();
  const std::vector<std::vector<double>> spectra = {{0.1, 0.2, 1.0 / 3.0, 4.0, 5.5, 1e300},
                                                    {-0.0, 1e-310, 2.0, 3.0, 7.0, 9.0}};
  const auto file = dir / eigen_cache_name(h);
  write_eigen_cache(file, h, spectra);
  const auto back = read_eigen_cache(file, h);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(back[t][i]), std::bit_cast<std::uint64_t>(spectra[t][i]));
    }
  }
}

TEST(EigenCache, LittleEndianLayout) {
  const auto dir = scratch("layout");
  const auto h = header();
  const auto file = dir / "x.eig";
  write_eigen_cache(file, h, {{1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 6}});
  std::ifstream in(file, std::ios::binary);
  std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(std::string(b.begin(), b.begin() + 8), "HTRMEIG1");
  EXPECT_EQ(b[8], 1);  // version, low byte first
  EXPECT_EQ(b[9], 0);
  EXPECT_EQ(b[12], static_cast<unsigned char>(EnsembleKind::inverse_ginibre_direct_sum));
  EXPECT_EQ(b[16], 3);  // n
  // header 8 + 4*5 + 8*3 + 4 + tag + 8 + 4, then 12 doubles
  EXPECT_EQ(b.size(), 8 + 20 + 24 + 4 + h.stream_tag.size() + 8 + 4 + 12 * 8);
}

TEST(EigenCache, MismatchesAreRejected) {
  const auto dir = scratch("mismatch");
  const auto h = header();
  const auto file = dir / "c.eig";
  write_eigen_cache(file, h, {{1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 6}});
  auto other = h;
  other.master_seed = 12;
  EXPECT_THROW(read_eigen_cache(file, other), CacheMismatch);
  other = h;
  other.stream_tag = "inverse-ginibre-sum";
  EXPECT_THROW(read_eigen_cache(file, other), CacheMismatch);
  other = h;
  other.trials = 3;
  EXPECT_THROW(read_eigen_cache(file, other), CacheMismatch);
  other = h;
  other.spec.m = 2;
  EXPECT_THROW(read_eigen_cache(file, other), CacheMismatch);
  EXPECT_THROW(read_eigen_cache(dir / "missing.eig", h), CacheMismatch);
  // truncated payload
  fs::resize_file(file, fs::file_size(file) - 5);
  EXPECT_THROW(read_eigen_cache(file, h), CacheMismatch);
  // garbage
  std::ofstream(dir / "junk.eig") << "not a cache";
  EXPECT_THROW(read_eigen_cache(dir / "junk.eig", h), CacheMismatch);
  EXPECT_THROW(write_eigen_cache(file, h, {{1.0}}), std::invalid_argument);
}

TEST(EigenCache, NamesSeparateRequests) {
  auto a = header();
  auto b = a;
  b.master_seed = 99;
  EXPECT_NE(eigen_cache_name(a), eigen_cache_name(b));
  EXPECT_EQ(eigen_cache_name(a), eigen_cache_name(header()));
}

TEST(Config, FileThenOverrides) {
  const auto dir = scratch("config");
  const auto file = dir / "run.cfg";
  std::ofstream(file) << "# comment\nexperiment = tail\n n = 150 \nl_list = 1, 3\nalpha_list=0.5,1.5 # trailing\n"
                         "cache = off\nkind = stable_gue\n";
  RunConfig c;
  apply_config_file(c, file.string());
  EXPECT_EQ(c.experiment, "tail");
  EXPECT_EQ(c.ensemble.n, 150);
  EXPECT_EQ(c.l_list, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.alpha_list, (std::vector<double>{0.5, 1.5}));
  EXPECT_FALSE(c.cache);
  EXPECT_EQ(c.ensemble.kind, EnsembleKind::stable_gue);
  c.set("n", "80");
  EXPECT_EQ(c.ensemble.n, 80);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.resolved_cache_dir(), "out/cache");
  c.set("cache_dir", "/tmp/x");
  EXPECT_EQ(c.resolved_cache_dir(), "/tmp/x");
}

TEST(Config, Defaults) {
  const RunConfig c;
  EXPECT_EQ(c.master_seed, 20211u);
  EXPECT_EQ(c.trials, 10000u);
  EXPECT_DOUBLE_EQ(c.bin_macro, 0.1);
  EXPECT_DOUBLE_EQ(c.bin_micro, 0.2);
  EXPECT_EQ(c.edge_count, 5);
  EXPECT_EQ(c.tail_count, 8);
}

TEST(Config, ErrorsAreInvalidConfig) {
  RunConfig c;
  EXPECT_THROW(c.set("bogus", "1"), InvalidConfig);
  EXPECT_THROW(c.set("n", "12x"), InvalidConfig);
  EXPECT_THROW(c.set("cache", "maybe"), InvalidConfig);
  EXPECT_THROW(c.set("kind", "wishart"), InvalidConfig);
  c.set("trials", "0");
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = {};
  c.set("alpha_list", "0.5, 2.5");
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = {};
  c.set("m_list", "5");
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = {};
  c.bin_micro = 0.0;
  EXPECT_THROW(c.validate(), InvalidConfig);
  EXPECT_THROW(apply_config_file(c, "/nonexistent/file.cfg"), InvalidConfig);
  const auto dir = scratch("badcfg");
  std::ofstream(dir / "bad.cfg") << "n 100\n";
  EXPECT_THROW(apply_config_file(c, (dir / "bad.cfg").string()), InvalidConfig);
}

TEST(Output, CsvAndJson) {
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(fmt(1.0 / 3.0), "0.3333333333");
  auto t = density_table("d");
  t.add({"L=1", "macroscopic", "probability", "0.25", "0.1", "3", "0.5", "0.49"});
  EXPECT_EQ(t.str(),
            "series,variable_tag,normalization,bin_left,bin_width,count,normalized_height,analytic_value\n"
            "L=1,macroscopic,probability,0.25,0.1,3,0.5,0.49\n");
  const auto s = spacing_table("s");
  EXPECT_EQ(s.header, (std::vector<std::string>{"series", "k", "s_bin_left", "bin_width", "normalized_height",
                                                "poisson_ref", "wigner_ref"}));
  const auto dir = scratch("output");
  ExperimentResult r{{{"experiment", "x"}}, {t}};
  const auto files = write_result(dir, "x", r);
  ASSERT_EQ(files.size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "d.csv"));
  std::ifstream in(dir / "x.json");
  EXPECT_EQ(Json::parse(in)["experiment"], "x");
}
