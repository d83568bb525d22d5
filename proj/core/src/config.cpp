#include "afv/config.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace afv {

namespace {

int read_margin() {
    const char* raw = std::getenv("AFV_MARGIN");
    if (raw == nullptr || *raw == '\0') return 2;
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(std::string(raw), &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("AFV_MARGIN must be a non-negative integer");
    }
    if (pos != std::string(raw).size() || value < 0)
        throw std::runtime_error("AFV_MARGIN must be a non-negative integer");
    return value;
}

}  // namespace

int search_margin() {
    static const int margin = read_margin();
    return margin;
}

}  // namespace afv
