#pragma once

#include <istratde/algorithms.hpp>
#include <istratde/benchmarks.hpp>
#include <istratde/core.hpp>
#include <istratde/diagnostics.hpp>
#include <istratde/engine.hpp>
#include <istratde/error.hpp>
#include <istratde/operators.hpp>
#include <istratde/rng.hpp>
