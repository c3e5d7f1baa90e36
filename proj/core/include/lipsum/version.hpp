#pragma once

#include <string_view>

namespace lipsum {

std::string_view version();
std::string_view git_describe();

}  // namespace lipsum
