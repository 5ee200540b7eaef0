# Generated by nnport 0.1.0: tf/subclassing -> tf/subclassing, pivot sha256 b2f7345205c1122506cbf2329392820309ad46609a6a5d8e0274c15fa40d460a
import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

INPUT_SHAPE = (200,)
DATASETS = {
    "imdb": ("data/imdb", "classification", "sequences"),
    "sst2": ("data/sst2", "classification", "sequences"),
}


class LSTMNet(keras.Model):
    def __init__(self):
        super().__init__()
        self.embedding = layers.Embedding(input_dim=10000, output_dim=128)
        self.lstm1 = layers.LSTM(units=64, return_sequences=True)
        self.lstm2 = layers.LSTM(units=64, return_sequences=True)
        self.lstm3 = layers.LSTM(units=64)
        self.dropout = layers.Dropout(rate=0.3)
        self.classifier = layers.Dense(units=2, activation="softmax")

    def call(self, inputs):
        embedding = self.embedding(inputs)
        lstm1 = self.lstm1(embedding)
        lstm2 = self.lstm2(lstm1)
        merged = lstm1 + lstm2
        lstm3 = self.lstm3(merged)
        dropout = self.dropout(lstm3)
        classifier = self.classifier(dropout)
        return classifier


def train(model, x, y):
    model.compile(
        optimizer=keras.optimizers.Adam(learning_rate=0.001),
        loss=keras.losses.SparseCategoricalCrossentropy(from_logits=False),
        metrics=["accuracy"],
    )
    model.fit(x, y, batch_size=64, epochs=10)
    return model.evaluate(x, y)
