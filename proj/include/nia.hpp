#pragma once

#include "nia/errors.hpp"
#include "nia/dataset.hpp"
#include "nia/agent_graph.hpp"
#include "nia/logistic.hpp"
#include "nia/info_metrics.hpp"
#include "nia/protocol.hpp"
#include "nia/rng.hpp"
#include "nia/quadrature.hpp"
#include "nia/instance_lab.hpp"
#include "nia/io.hpp"
#include "nia/parallel.hpp"
#include "nia/experiment.hpp"
#include "nia/verify.hpp"
