#include <doctest.h>

#include "casc/alert.hpp"
#include "casc/dataset.hpp"

using namespace casc;

TEST_CASE("alert_of_count thresholds") {
    CHECK(alert_of_count(0) == AlertLevel::NoAction);
    CHECK(alert_of_count(1) == AlertLevel::Cautious);
    CHECK(alert_of_count(7) == AlertLevel::Cautious);
    CHECK(alert_of_count(8) == AlertLevel::Spray);
    CHECK(alert_of_count(500) == AlertLevel::Spray);
}

TEST_CASE("alert_of_count is monotone over 0..1000") {
    AlertLevel prev = alert_of_count(0);
    for (std::uint64_t c = 1; c <= 1000; ++c) {
        const AlertLevel cur = alert_of_count(c);
        CHECK(alert_index(cur) >= alert_index(prev));
        prev = cur;
    }
}

TEST_CASE("truth_alert derives from the count") {
    ImageRecord rec;
    rec.image_id = "a";
    rec.stages["phone"] = {};
    rec.truth_count = 0;
    CHECK(truth_alert(rec) == AlertLevel::NoAction);
    rec.truth_count = 7;
    CHECK(truth_alert(rec) == AlertLevel::Cautious);
    rec.truth_count = 8;
    CHECK(truth_alert(rec) == AlertLevel::Spray);
}

TEST_CASE("alert order is NoAction < Cautious < Spray") {
    CHECK(AlertLevel::NoAction < AlertLevel::Cautious);
    CHECK(AlertLevel::Cautious < AlertLevel::Spray);
}
