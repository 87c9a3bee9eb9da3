#pragma once

#include "affsym/blaschke.hpp"
#include "affsym/catalog.hpp"
#include "affsym/errors.hpp"
#include "affsym/family.hpp"
#include "affsym/flow.hpp"
#include "affsym/jet.hpp"
#include "affsym/parallel.hpp"
#include "affsym/sampling.hpp"
#include "affsym/series.hpp"
#include "affsym/small_matrix.hpp"
#include "affsym/sym_eig3.hpp"
#include "affsym/symmetry.hpp"
