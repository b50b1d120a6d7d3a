import logging
from dataclasses import replace

from joblib import Parallel, delayed

from pfenkf.exceptions import EnsembleCollapseError, LoadStepError
from pfenkf.fracture.services.solver import advance

logger = logging.getLogger(__name__)

FAILURE_THRESHOLD = 0.1


def _advance_member(member, disc, params, settings, bcs, du):
    try:
        return advance(member, disc, params, settings, bcs, du), None
    except LoadStepError as error:
        return member, str(error)


def map_members(function, ensemble, args=(), n_jobs=1):
    """
    `function(member, *args)` for every active member, in parallel when
    n_jobs != 1; returns the results keyed by member index, in index order.
    """
    indices = [int(i) for i in ensemble.active]
    results = Parallel(n_jobs=n_jobs)(
        delayed(function)(ensemble.members[i], *args) for i in indices
    )
    return dict(zip(indices, results))


def check_failures(ensemble, threshold=FAILURE_THRESHOLD):
    if ensemble.n_failed > threshold * ensemble.n_ens:
        logger.error("%d of %d members failed by step %d", ensemble.n_failed, ensemble.n_ens, ensemble.step)
        raise EnsembleCollapseError(ensemble.n_failed, ensemble.n_ens, ensemble.step)


def forecast_step(ensemble, disc, params, settings, bcs, du, n_jobs=1, failure_threshold=FAILURE_THRESHOLD):
    """
    Advance every active member by one load increment `du`.

    Members are independent; a member whose load step fails is flagged and
    keeps its last converged state. The run aborts once more than
    `failure_threshold` of the members have failed.
    """
    outcomes = map_members(_advance_member, ensemble, (disc, params, settings, bcs, du), n_jobs)
    members = list(ensemble.members)
    failed = list(ensemble.failed)
    for index, (member, error) in outcomes.items():
        members[index] = member
        if error is not None:
            failed[index] = True
            logger.warning("Member %d failed at step %d: %s", index, member.step + 1, error)
        else:
            logger.debug("Member %d reached step %d", index, member.step)
    forecast = replace(ensemble, members=tuple(members), failed=tuple(failed))
    check_failures(forecast, failure_threshold)
    return forecast
