#pragma once

#include "optctl/circuit.hpp"
#include "optctl/errors.hpp"
#include "optctl/expr.hpp"
#include "optctl/linalg.hpp"
#include "optctl/model_text.hpp"
#include "optctl/ocp.hpp"
#include "optctl/problem_file.hpp"
#include "optctl/solver.hpp"
#include "optctl/transcribe.hpp"
