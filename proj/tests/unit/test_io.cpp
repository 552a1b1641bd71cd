#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qus/checksum.hpp"
#include "qus/error.hpp"
#include "qus/image_io.hpp"
#include "qus/parallel.hpp"

namespace {

using namespace qus;
namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qus_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

TEST_F(IoTest, PgmRoundTrip8And16Bit) {
    Grid<double> g(5, 3);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i) / 14.0;
    for (unsigned maxval : {255u, 65535u}) {
        io::write_pgm(dir_ / "g.pgm", g, maxval, {{"producer", "test"}});
        const auto back = io::read_pgm(dir_ / "g.pgm");
        ASSERT_TRUE(back.same_shape(g));
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(back[i], g[i], 0.5 / maxval + 1e-15);
    }
}

TEST_F(IoTest, PgmRejectsBadInput) {
    std::ofstream(dir_ / "bad.pgm") << "P2\n2 2\n255\n0 0 0 0\n";
    EXPECT_THROW(io::read_pgm(dir_ / "bad.pgm"), FormatError);
    std::ofstream(dir_ / "short.pgm", std::ios::binary) << "P5\n4 4\n255\nab";
    EXPECT_THROW(io::read_pgm(dir_ / "short.pgm"), FormatError);
    EXPECT_THROW(io::read_pgm(dir_ / "missing.pgm"), IoError);
    EXPECT_THROW(io::write_pgm(dir_ / "x.pgm", Grid<double>(1, 1, 1.5)), InvalidArgument);
}

TEST_F(IoTest, PfmRoundTripWithMetadata) {
    Grid<double> g(4, 3);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.25 * static_cast<double>(i) - 1.0;
    const Metadata meta{{"producer", "qusnak"}, {"config_hash", "0123"}};
    io::write_pfm(dir_ / "a.pfm", g, meta);
    const auto back = io::read_pfm(dir_ / "a.pfm");
    EXPECT_EQ(back.values, g);
    EXPECT_EQ(back.meta, meta);
    io::write_pfm(dir_ / "b.pfm", back.values, back.meta);
    EXPECT_EQ(sha256_file(dir_ / "a.pfm"), sha256_file(dir_ / "b.pfm"));
}

TEST_F(IoTest, PfmIsBottomRowFirstLittleEndian) {
    Grid<double> g(1, 2, std::vector<double>{1.0, 2.0});
    io::write_pfm(dir_ / "o.pfm", g);
    std::ifstream in(dir_ / "o.pfm", std::ios::binary);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    EXPECT_EQ(l1, "Pf");
    EXPECT_EQ(l2, "1 2");
    EXPECT_EQ(l3, "-1.0");
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    EXPECT_EQ(bytes[3], 0x40);  // 2.0f = 0x40000000, stored first
}

TEST_F(IoTest, ParamMapMaskSurvivesFile) {
    ParamMap p(3, 2);
    p.m[0] = 1.5;
    p.valid[0] = 1;
    p.m[4] = 0.75;
    p.valid[4] = 1;
    p.meta["estimator"] = "moment";
    io::save_param_map(dir_ / "p.pfm", p);
    const auto back = io::load_param_map(dir_ / "p.pfm");
    EXPECT_EQ(back.valid, p.valid);
    EXPECT_EQ(back.m[0], 1.5);
    EXPECT_TRUE(std::isnan(back.m[1]));
    EXPECT_EQ(back.meta.at("estimator"), "moment");
}

TEST_F(IoTest, EnvelopeRoundTrip) {
    const EnvelopeImage img(2, 2, std::vector<double>{0.5, 1.0, 1.5, 2.0});
    io::save_envelope(dir_ / "e.pfm", img);
    EXPECT_EQ(io::load_envelope(dir_ / "e.pfm").amplitudes(), img.amplitudes());
    io::write_pfm(dir_ / "neg.pfm", Grid<double>(1, 1, -1.0));
    EXPECT_THROW(io::load_envelope(dir_ / "neg.pfm"), Error);
}

TEST_F(IoTest, CsvWritesNaNAndMetadata) {
    Grid<double> g(2, 2, std::vector<double>{1.0, std::nan(""), 0.5, 2.0});
    io::write_csv(dir_ / "m.csv", g, {{"k", "v"}});
    std::ifstream in(dir_ / "m.csv");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_NE(text.find("# k: v"), std::string::npos);
    EXPECT_NE(text.find("nan"), std::string::npos);
}

TEST_F(IoTest, TruncatedPfm) {
    std::ofstream(dir_ / "t.pfm", std::ios::binary) << "Pf\n4 4\n-1.0\nabc";
    EXPECT_THROW(io::read_pfm(dir_ / "t.pfm"), FormatError);
}

TEST(Checksum, KnownDigests) {
    EXPECT_EQ(sha256_hex(std::string_view("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex(std::string_view("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Parallel, CoversRangeOnce) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) ++hits[i];
    }, 4);
    for (int h : hits) EXPECT_EQ(h, 1);
    parallel_for(0, [](std::size_t, std::size_t) { FAIL(); }, 4);
}

}  // namespace
