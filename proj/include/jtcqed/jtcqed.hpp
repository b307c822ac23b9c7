#pragma once

#include "jtcqed/analysis.hpp"
#include "jtcqed/dynamics.hpp"
#include "jtcqed/errors.hpp"
#include "jtcqed/expm.hpp"
#include "jtcqed/hilbert.hpp"
#include "jtcqed/model.hpp"
#include "jtcqed/parallel.hpp"
#include "jtcqed/version.hpp"
