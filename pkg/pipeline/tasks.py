# pipeline/tasks.py
from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional

from celery import shared_task
from django.conf import settings

from footage.reports import plain, selection_to_dict

from .ablation import run_ablation
from .runner import PipelineConfig, run_pipeline

log = logging.getLogger(__name__)

PIPELINE_QUEUE = getattr(settings, "CELERY_PIPELINE_QUEUE", "pipeline")


@shared_task(
    bind=True,
    name="pipeline.run_pipeline",
    queue=PIPELINE_QUEUE,
    acks_late=True,
)
def run_pipeline_task(self, config: Dict[str, Any]) -> Dict[str, Any]:
    """
    Run the full fast-forward for one container on a worker.

    ``config`` is a PipelineConfig as a dict; reports land in
    ``config["output"]`` when given. Returns the selection and metrics.
    """
    cfg = PipelineConfig.from_dict(config)
    log.info("Task %s: pipeline on %s", self.request.id, cfg.input or f"seed {cfg.seed}")
    result = run_pipeline(cfg)
    return plain({"selection": selection_to_dict(result.selection), "metrics": result.report.to_dict()})


@shared_task(
    bind=True,
    name="pipeline.run_ablation",
    queue=PIPELINE_QUEUE,
    acks_late=True,
)
def run_ablation_task(
    self,
    config: Dict[str, Any],
    methods: List[str],
    output: Optional[str] = None,
) -> Dict[str, Any]:
    cfg = PipelineConfig.from_dict(config)
    log.info("Task %s: ablation of %s", self.request.id, ", ".join(methods))
    return plain(run_ablation(cfg, methods, output=output).to_dict())
