#pragma once

#include <cmath>

namespace fdbeam {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

inline constexpr double LN2 = 0.6931471805599453;

// nats -> bits/s/Hz
inline double nats_to_bits(double nats) { return nats / LN2; }

}  // namespace fdbeam
