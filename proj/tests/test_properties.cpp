#include <gtest/gtest.h>

#include "properties.hpp"

namespace {

void expect_clean(const properties::Outcome& o, int min_cases) {
    EXPECT_GE(o.cases, min_cases);
    for (const auto& f : o.failures)
        ADD_FAILURE() << f;
}

} // namespace

TEST(Properties, TraceConservationAndBounds) {
    properties::Outcome o;
    properties::trace_and_bounds(o, 200);
    expect_clean(o, 400);
}

TEST(Properties, FluxUnitarity) {
    properties::Outcome o;
    properties::flux(o, 400);
    expect_clean(o, 400);
}

TEST(Properties, HalfPeriodPeriodicity) {
    properties::Outcome o;
    properties::half_period(o, 300);
    expect_clean(o, 300);
}

TEST(Properties, ExchangeSymmetry) {
    properties::Outcome o;
    properties::exchange(o, 100);
    expect_clean(o, 100);
}

TEST(Properties, ParallelDeterminism) {
    properties::Outcome o;
    properties::parallel_determinism(o, 5);
    expect_clean(o, 60);
}
