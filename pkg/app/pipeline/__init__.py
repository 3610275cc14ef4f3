from .orchestrator import MVPShapleyPipeline, PipelineResult, TrainOutcome
