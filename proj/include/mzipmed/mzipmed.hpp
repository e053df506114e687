#ifndef MZIPMED_MZIPMED_HPP
#define MZIPMED_MZIPMED_HPP

#include "dataset.hpp"
#include "effects.hpp"
#include "errors.hpp"
#include "glm.hpp"
#include "mediate.hpp"
#include "mzip.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "simulate.hpp"

#endif
