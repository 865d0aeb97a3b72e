#pragma once

#include <json.hpp>

#include <complex>
#include <fstream>
#include <stdexcept>
#include <string>

namespace kdet_test {

inline nlohmann::json load_fixture(const std::string& name) {
    std::ifstream in(std::string(KDET_TEST_DATA) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture " + name);
    return nlohmann::json::parse(in);
}

inline std::complex<double> as_cplx(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    return {j[0].get<double>(), j[1].get<double>()};
}

inline double rel_err(std::complex<double> got, std::complex<double> want) {
    double scale = std::abs(want);
    return std::abs(got - want) / (scale > 0 ? scale : 1.0);
}

}  // namespace kdet_test
