#pragma once

namespace afv {

// Extra width added to every derived witness-search window (see the search
// procedures in hyper.hpp).  Defaults to 2; override with the AFV_MARGIN
// environment variable, read once per process.
int search_margin();

}  // namespace afv
