#pragma once

#include <lrtc/bench.hpp>
#include <lrtc/completion.hpp>
#include <lrtc/cpd_lrtc.hpp>
#include <lrtc/csv.hpp>
#include <lrtc/data.hpp>
#include <lrtc/errors.hpp>
#include <lrtc/halrtc.hpp>
#include <lrtc/impute.hpp>
#include <lrtc/metrics.hpp>
#include <lrtc/seed.hpp>
#include <lrtc/svt.hpp>
#include <lrtc/tensor.hpp>
