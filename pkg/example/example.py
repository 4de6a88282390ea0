from eprsim.task import EPRSimTask, load_config_file

config = load_config_file("example/config.yaml")
task = EPRSimTask(config)
report = task.process()
print(report.to_text())
