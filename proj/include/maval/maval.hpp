#pragma once

#include "maval/common.hpp"
#include "maval/convexfn.hpp"
#include "maval/decompose.hpp"
#include "maval/functionals.hpp"
#include "maval/json_io.hpp"
#include "maval/linalg.hpp"
#include "maval/measure.hpp"
#include "maval/verify.hpp"
