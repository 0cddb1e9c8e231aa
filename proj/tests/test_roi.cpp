#include "support.hpp"

#include "thermolab/roi.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace thermolab;

namespace {

double direct_mean(const TemperatureMap& m, const RoiBox& b)
{
    long double sum = 0.0L;
    for (int y = b.y; y < b.y + b.h; ++y)
        for (int x = b.x; x < b.x + b.w; ++x)
            sum += m.at(x, y);
    return static_cast<double>(sum / (b.w * b.h));
}

const RoiStats& stats_for(const std::vector<RoiStats>& all, RoiLabel label)
{
    return *std::find_if(all.begin(), all.end(), [&](const RoiStats& s) { return s.label == label; });
}

} // namespace

TEST_CASE("constant field gives identical min, max and mean")
{
    const TemperatureMap m = TemperatureMap::uniform(160, 120, 34.5);
    for (const RoiStats& s : extract_stats(m, default_roi_layout(160, 120))) {
        CHECK(s.min == 34.5);
        CHECK(s.max == 34.5);
        CHECK(s.mean == 34.5);
        CHECK(s.valid_pixel_fraction == 1.0);
    }
}

TEST_CASE("two-valued box")
{
    TemperatureMap m = TemperatureMap::uniform(8, 8, 30.0);
    const RoiSet rois({RoiBox{RoiLabel::Forehead, 2, 2, 4, 2}});
    for (int y = 2; y < 4; ++y)
        for (int x = 2; x < 6; ++x)
            m.at(x, y) = (x % 2 == 0) ? 34.0 : 35.0;
    const RoiStats s = extract_stats(m, rois).at(0);
    CHECK(s.mean == 34.5);
    CHECK(s.min == 34.0);
    CHECK(s.max == 35.0);
}

TEST_CASE("textured face field reproduces the intended ROI means")
{
    const RoiSet rois = default_roi_layout(160, 120);
    TemperatureMap m = TemperatureMap::uniform(160, 120, 28.0);
    const std::pair<RoiLabel, double> targets[] = {
        {RoiLabel::Forehead, 36.1}, {RoiLabel::Nose, 36.2}, {RoiLabel::RightCheek, 35.5}, {RoiLabel::LeftCheek, 35.9}};
    for (const auto& [label, value] : targets) {
        const RoiBox& b = *rois.find(label);
        for (int y = b.y; y < b.y + b.h; ++y)
            for (int x = b.x; x < b.x + b.w; ++x)
                m.at(x, y) = value + ((x + y) % 2 == 0 ? 0.2 : -0.2);
    }
    const auto stats = extract_stats(m, rois);
    for (const auto& [label, value] : targets) {
        const RoiStats& s = stats_for(stats, label);
        CHECK(std::abs(s.mean - direct_mean(m, *rois.find(label))) < 1e-9);
        CHECK(std::abs(s.mean - value) < 1e-9);
        CHECK(s.max == doctest::Approx(value + 0.2));
    }
}

TEST_CASE("NaN pixels are skipped and reduce the valid fraction")
{
    TemperatureMap m = TemperatureMap::uniform(4, 4, 33.0);
    m.at(0, 0) = std::nan("");
    const RoiSet rois({RoiBox{RoiLabel::Nose, 0, 0, 2, 2}});
    const RoiStats s = extract_stats(m, rois).at(0);
    CHECK(s.valid_pixel_fraction == 0.75);
    CHECK(s.mean == 33.0);
    m.at(1, 0) = m.at(0, 1) = m.at(1, 1) = std::nan("");
    CHECK_THROWS_AS(extract_stats(m, rois), InputError);
}

TEST_CASE("ROI sets reject duplicates, tiny boxes and out-of-bounds use")
{
    CHECK_THROWS_AS(RoiSet({RoiBox{RoiLabel::Nose, 0, 0, 2, 2}, RoiBox{RoiLabel::Nose, 4, 4, 2, 2}}), InputError);
    CHECK_THROWS_AS(RoiSet({RoiBox{RoiLabel::Nose, 0, 0, 1, 2}}), InputError);
    const RoiSet rois({RoiBox{RoiLabel::Nose, 6, 6, 4, 4}});
    CHECK_THROWS_AS(extract_stats(TemperatureMap::uniform(8, 8, 30.0), rois), InputError);
}

TEST_CASE("default layout: four disjoint in-bounds boxes")
{
    const RoiSet rois = default_roi_layout(160, 120);
    REQUIRE(rois.size() == 4);
    for (const RoiBox& a : rois.boxes()) {
        CHECK(a.fits(160, 120));
        CHECK((a.w * a.h) % 2 == 0);
        for (const RoiBox& b : rois.boxes())
            if (&a != &b)
                CHECK_FALSE(a.overlaps(b));
    }
    CHECK_THROWS_AS(default_roi_layout(31, 120), InputError);
}

TEST_CASE("default layout scales with the frame")
{
    const RoiSet small = default_roi_layout(160, 120);
    const RoiSet big = default_roi_layout(320, 240);
    for (std::size_t i = 0; i < 4; ++i) {
        const RoiBox& a = small.boxes()[i];
        const RoiBox& b = big.boxes()[i];
        CHECK(b.label == a.label);
        CHECK(b.x == 2 * a.x);
        CHECK(b.y == 2 * a.y);
        CHECK(b.w == 2 * a.w);
        CHECK(b.h == 2 * a.h);
    }
}

TEST_CASE("property: nose centre stays in the middle third for any frame size")
{
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> dim(32, 2048);
    for (int i = 0; i < 2000; ++i) {
        const int w = dim(rng), h = dim(rng);
        const RoiSet rois = default_roi_layout(w, h);
        const RoiBox& n = *rois.find(RoiLabel::Nose);
        const double centre = n.x + n.w / 2.0;
        INFO(w << "x" << h);
        CHECK(centre >= w / 3.0);
        CHECK(centre <= 2.0 * w / 3.0);
        for (const RoiBox& b : rois.boxes())
            CHECK(b.fits(w, h));
    }
}

TEST_CASE("series shape and single-frame boundary")
{
    const RoiSet rois = default_roi_layout(64, 48);
    std::vector<std::vector<RoiStats>> stream;
    for (int k = 0; k < 3; ++k)
        stream.push_back(extract_stats(TemperatureMap::uniform(64, 48, 30.0 + k, testsupport::t0() + Seconds{60 * k}), rois));
    const auto series = build_series(stream, PhaseKind::Stimulus);
    REQUIRE(series.size() == 4);
    for (const RoiSeries& s : series) {
        CHECK(s.samples.size() == 3);
        CHECK(s.phase == PhaseKind::Stimulus);
        CHECK(s.trend_ready());
    }
    const auto single = build_series({stream[0]}, PhaseKind::Response);
    REQUIRE(single.size() == 4);
    for (const RoiSeries& s : single)
        CHECK_FALSE(s.trend_ready());
}

TEST_CASE("property: series are independent of input order")
{
    const RoiSet rois = default_roi_layout(64, 48);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> temp(30.0, 37.0);
    std::vector<std::vector<RoiStats>> stream;
    for (int k = 0; k < 12; ++k)
        stream.push_back(extract_stats(TemperatureMap::uniform(64, 48, temp(rng), testsupport::t0() + Seconds{60 * k}), rois));
    const auto sorted = build_series(stream, PhaseKind::Acclimatization);
    for (int trial = 0; trial < 50; ++trial) {
        auto shuffled = stream;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(build_series(shuffled, PhaseKind::Acclimatization) == sorted);
    }
    stream.push_back(stream.front());
    CHECK_THROWS_AS(build_series(stream, PhaseKind::Acclimatization), InputError);
}

TEST_CASE("ROI labels round-trip through their names")
{
    for (RoiLabel l : kRoiLabels)
        CHECK(parse_roi_label(to_string(l)) == l);
    CHECK_THROWS_AS(parse_roi_label("chin"), InputError);
}
