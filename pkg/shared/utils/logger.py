import logging
import sys
from typing import Optional
import json


class RunLogger:
    """Logger with run ID support for correlating the stages of one experiment"""

    def __init__(self, service_name: str, log_level: str = "INFO"):
        self.service_name = service_name
        self.logger = logging.getLogger(service_name)
        self.logger.setLevel(getattr(logging, log_level.upper()))

        # stdout carries reports, so diagnostics go to stderr
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(getattr(logging, log_level.upper()))

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - [%(run_id)s] - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        handler.setFormatter(formatter)

        if not self.logger.handlers:
            self.logger.addHandler(handler)

    def _log(self, level: str, message: str, run_id: Optional[str] = None, **kwargs):
        """Internal log method with run ID"""
        extra = {
            'run_id': run_id or 'N/A',
            **kwargs
        }
        getattr(self.logger, level)(message, extra=extra)

    def info(self, message: str, run_id: Optional[str] = None, **kwargs):
        self._log('info', message, run_id, **kwargs)

    def error(self, message: str, run_id: Optional[str] = None, **kwargs):
        self._log('error', message, run_id, **kwargs)

    def warning(self, message: str, run_id: Optional[str] = None, **kwargs):
        self._log('warning', message, run_id, **kwargs)

    def debug(self, message: str, run_id: Optional[str] = None, **kwargs):
        self._log('debug', message, run_id, **kwargs)

    def log_stage_event(self, stage: int, run_id: Optional[str], status: str, **fields):
        """Log one algorithm stage (probabilities, angles, fidelities) as a JSON payload"""
        if not self.logger.isEnabledFor(logging.DEBUG):
            return
        log_entry = {
            'service': self.service_name,
            'stage': stage,
            'run_id': run_id,
            'status': status,
            **fields
        }
        self.debug(f"Stage event: {json.dumps(log_entry, default=float)}", run_id=run_id)


def get_logger(service_name: str, log_level: str = "INFO") -> RunLogger:
    """Get or create a logger for a component"""
    return RunLogger(service_name, log_level)
