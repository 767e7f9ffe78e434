#pragma once

#include "ffdelay/bigint.hpp"
#include "ffdelay/bounds.hpp"
#include "ffdelay/error.hpp"
#include "ffdelay/field.hpp"
#include "ffdelay/gappa.hpp"
#include "ffdelay/kernels.hpp"
#include "ffdelay/matrix.hpp"
#include "ffdelay/oracle.hpp"
#include "ffdelay/shadow.hpp"
#include "ffdelay/trace.hpp"
