#include <stdexcept>

#include "doctest.h"
#include "vcube/failure.hpp"

using namespace vcube;

TEST_CASE("detection time follows the test-round-plus-timeout rule") {
    DetectorPolicy policy;  // interval 5.0, timeout 4.0
    CHECK(policy.detection_time(1, 0, 0.0) == doctest::Approx(4.0));
    CHECK(policy.detection_time(1, 0, 5.0) == doctest::Approx(9.0));
    CHECK(policy.detection_time(1, 0, 0.1) == doctest::Approx(9.0));
    CHECK(policy.detection_time(1, 0, 10.0) == doctest::Approx(14.0));
}

TEST_CASE("detection is strictly after the crash and monotone in crash time") {
    DetectorPolicy policy;
    SimTime prev = -1.0;
    for (double c = 0.0; c < 20.0; c += 0.7) {
        const SimTime t = policy.detection_time(1, 0, c);
        CHECK(t > c);
        CHECK(t >= prev);
        prev = t;
    }
}

TEST_CASE("detection_time rejects self-observation and bad policies") {
    DetectorPolicy policy;
    CHECK_THROWS_AS(policy.detection_time(2, 2, 1.0), std::invalid_argument);
    DetectorPolicy bad;
    bad.timeout = 0.0;
    CHECK_THROWS_AS(bad.detection_time(1, 0, 1.0), std::invalid_argument);
}

TEST_CASE("is_correct_at treats the crash instant as already crashed") {
    CHECK(CrashSchedule{}.is_correct_at(3, 1000.0));
    CrashSchedule sched({{2, 3.0}});
    CHECK(sched.is_correct_at(2, 2.9));
    CHECK(!sched.is_correct_at(2, 3.0));
    CHECK(!sched.is_correct_at(2, 3.1));
    CHECK(sched.is_correct_at(1, 3.1));
}

TEST_CASE("crash schedules reject duplicates and negative times") {
    CHECK_THROWS_AS((CrashSchedule({{1, 0.0}, {1, 2.0}})), std::invalid_argument);
    CHECK_THROWS_AS((CrashSchedule({{1, -0.5}})), std::invalid_argument);
}
